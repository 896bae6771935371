//! Wreath products Δ≀Γ and their structured endomorphisms.
//!
//! Elements are pairs (f, γ) of a finitely supported function f: Γ→Δ and
//! a top element γ, multiplying by (f1, γ1)(f2, γ2) = (f1 · γ1f2, γ1γ2)
//! with (γf)(x) = f(γ⁻¹x). Endomorphism constructors cover base
//! epimorphism lifts, top epimorphism pushforwards, matrix-induced maps
//! under the identification of (Z/nZ)^d[Γ] with R^d for R = (Z/nZ)[Γ],
//! and the Hensel-lifted witness pipeline for p-group bases. Finite
//! instances come with exhaustive structural checkers (centre, abelian
//! normal subgroups, basic-endomorphism normalization).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, GroupHom, GroupSpec, Payload};
use crate::matrices::{hensel_lift, is_block_upper, BlockShape, RingMatrix};
use crate::rings::{CoeffRing, GroupRingElement, RingScalar, ScalarRepr};
use crate::rng::SplitMix64;

/// Default order budget for exhaustive wreath scans.
pub const DEFAULT_WREATH_BUDGET: u64 = 256;

/// Endomorphism verification: exhaustive up to this source order,
/// 1000 sampled pairs beyond (and for infinite instances).
const ENDO_EXHAUSTIVE_CAP: u64 = 1024;
const ENDO_SAMPLE_PAIRS: usize = 1000;
const INTERNAL_CHECK_SEED: u64 = 0x5752_4541_5448_0001;

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

/// Descriptor of a wreath product Δ≀Γ.
#[derive(Clone, PartialEq, Eq)]
pub struct WreathProduct {
    base: Group,
    top: Group,
}

impl fmt::Debug for WreathProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}wr{}", self.base, self.top)
    }
}

impl fmt::Display for WreathProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} wr {}", self.base, self.top)
    }
}

impl WreathProduct {
    pub fn new(base: Group, top: Group) -> WreathProduct {
        WreathProduct { base, top }
    }

    pub fn base(&self) -> &Group {
        &self.base
    }

    pub fn top(&self) -> &Group {
        &self.top
    }

    pub fn is_finite(&self) -> bool {
        self.base.is_finite() && self.top.is_finite()
    }

    /// |Δ|^|Γ| · |Γ| for finite instances.
    pub fn order(&self) -> Option<u64> {
        let b = self.base.order()?;
        let t = self.top.order()?;
        b.checked_pow(t as u32)?.checked_mul(t)
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement {
            wreath: self.clone(),
            base_fn: vec![],
            top: self.top.identity(),
        }
    }

    /// Builds (f, γ), normalizing the support: duplicate points are
    /// combined by base multiplication, identity values are dropped.
    pub fn element(
        &self,
        base_fn: Vec<(GroupElement, GroupElement)>,
        top: GroupElement,
    ) -> Result<WreathElement> {
        if *top.group() != self.top {
            return Err(Error::GroupMismatch);
        }
        let mut merged: Vec<(GroupElement, GroupElement)> = Vec::new();
        for (pt, val) in base_fn {
            if *pt.group() != self.top || *val.group() != self.base {
                return Err(Error::GroupMismatch);
            }
            match merged.binary_search_by(|(q, _)| q.canonical_cmp(&pt)) {
                Ok(i) => {
                    let prod = self.base.mul(&merged[i].1, &val)?;
                    merged[i].1 = prod;
                }
                Err(i) => merged.insert(i, (pt, val)),
            }
        }
        merged.retain(|(_, v)| !v.is_identity());
        Ok(WreathElement {
            wreath: self.clone(),
            base_fn: merged,
            top,
        })
    }

    /// The point mass δ_(γ): value δ at coordinate γ.
    pub fn point_mass(&self, delta: GroupElement, gamma: GroupElement) -> Result<WreathElement> {
        let top = self.top.identity();
        self.element(vec![(gamma, delta)], top)
    }

    /// The copy of Γ: (0, γ).
    pub fn top_element(&self, gamma: GroupElement) -> Result<WreathElement> {
        self.element(vec![], gamma)
    }

    pub fn mul(&self, u: &WreathElement, v: &WreathElement) -> Result<WreathElement> {
        if u.wreath != *self || v.wreath != *self {
            return Err(Error::Mismatch);
        }
        // f1 · (γ1 f2): the support point y of f2 moves to γ1·y.
        let mut terms = u.base_fn.clone();
        for (pt, val) in &v.base_fn {
            terms.push((self.top.mul(&u.top, pt)?, val.clone()));
        }
        let top = self.top.mul(&u.top, &v.top)?;
        // Pointwise products must respect the order f1(x)·f2'(x); element()
        // merges left-to-right, and u's terms were inserted first.
        self.element(terms, top)
    }

    pub fn inv(&self, u: &WreathElement) -> Result<WreathElement> {
        let top_inv = self.top.inv(&u.top)?;
        // (f, γ)^{-1} = (g, γ^{-1}) with g(γ^{-1}y) = f(y)^{-1}.
        let mut terms = Vec::with_capacity(u.base_fn.len());
        for (pt, val) in &u.base_fn {
            terms.push((self.top.mul(&top_inv, pt)?, self.base.inv(val)?));
        }
        self.element(terms, top_inv)
    }

    /// All elements of a finite wreath product, deterministic order.
    pub fn enumerate(&self) -> Result<Vec<WreathElement>> {
        let base_elems = self.base.enumerate()?;
        let tops = self.top.enumerate()?;
        let positions = tops.clone();
        let mut out = Vec::new();
        let mut idx = vec![0usize; positions.len()];
        loop {
            let base_fn: Vec<(GroupElement, GroupElement)> = positions
                .iter()
                .zip(&idx)
                .map(|(pt, &i)| (pt.clone(), base_elems[i].clone()))
                .collect();
            for t in &tops {
                out.push(self.element(base_fn.clone(), t.clone())?);
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return Ok(out);
                }
                idx[pos] += 1;
                if idx[pos] < base_elems.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn random_element(&self, rng: &mut SplitMix64) -> WreathElement {
        let n = rng.below(4) as usize;
        let base_fn: Vec<(GroupElement, GroupElement)> = (0..n)
            .map(|_| {
                (
                    self.top.random_element(rng),
                    self.base.random_element(rng),
                )
            })
            .collect();
        let top = self.top.random_element(rng);
        self.element(base_fn, top).expect("consistent")
    }

    /// Exact centre of a finite wreath product, exhaustively.
    pub fn centre(&self, budget: u64) -> Result<Vec<WreathElement>> {
        let order = self.order().ok_or(Error::InfiniteGroup)?;
        if order > budget {
            return Err(Error::BudgetExceeded {
                needed: order,
                budget,
            });
        }
        let all = self.enumerate()?;
        let mut out = Vec::new();
        for z in &all {
            let mut central = true;
            for g in &all {
                if self.mul(z, g)? != self.mul(g, z)? {
                    central = false;
                    break;
                }
            }
            if central {
                out.push(z.clone());
            }
        }
        Ok(out)
    }
}

/// An element (f, γ) of Δ≀Γ in canonical form: support sorted by the top
/// group's canonical element order, no identity values stored.
#[derive(Clone, PartialEq, Eq)]
pub struct WreathElement {
    wreath: WreathProduct,
    base_fn: Vec<(GroupElement, GroupElement)>,
    top: GroupElement,
}

impl WreathElement {
    pub fn wreath(&self) -> &WreathProduct {
        &self.wreath
    }

    pub fn base_fn(&self) -> &[(GroupElement, GroupElement)] {
        &self.base_fn
    }

    pub fn top(&self) -> &GroupElement {
        &self.top
    }

    pub fn is_identity(&self) -> bool {
        self.base_fn.is_empty() && self.top.is_identity()
    }

    /// True iff the element lies in the base group Δ[Γ].
    pub fn in_base(&self) -> bool {
        self.top.is_identity()
    }

    /// The value f(x); identity off the support.
    pub fn value_at(&self, x: &GroupElement) -> GroupElement {
        match self.base_fn.binary_search_by(|(q, _)| q.canonical_cmp(x)) {
            Ok(i) => self.base_fn[i].1.clone(),
            Err(_) => self.wreath.base.identity(),
        }
    }

    /// Canonical sort/set key.
    pub fn key(&self) -> (Vec<(Payload, Payload)>, Payload) {
        (
            self.base_fn
                .iter()
                .map(|(p, v)| (p.payload().clone(), v.payload().clone()))
                .collect(),
            self.top.payload().clone(),
        )
    }
}

impl fmt::Debug for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        if self.base_fn.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (pt, val)) in self.base_fn.iter().enumerate() {
                if i > 0 {
                    write!(f, "+")?;
                }
                write!(f, "{val}@{pt}")?;
            }
        }
        write!(f, "; {})", self.top)
    }
}

// ---------------------------------------------------------------------------
// Endomorphisms
// ---------------------------------------------------------------------------

/// Presentation of a finite abelian p-group P = ⊕_k (Z/p^kZ)^{d_k};
/// `parts[k-1]` is the multiplicity d_k of the Z/p^k factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PGroupBasis {
    pub p: u64,
    pub parts: Vec<usize>,
}

impl PGroupBasis {
    pub fn new(p: u64, parts: Vec<usize>) -> PGroupBasis {
        assert!(
            !parts.is_empty() && parts.iter().any(|&d| d > 0),
            "at least one positive part"
        );
        PGroupBasis { p, parts }
    }

    /// Generator descriptors (exponent k, index j) for k >= start, in
    /// matrix index order f(k,j) = d_start + … + d_{k-1} + j.
    pub fn generators_from(&self, start: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k0, &d) in self.parts.iter().enumerate().skip(start - 1) {
            for j in 0..d {
                out.push((k0 + 1, j));
            }
        }
        out
    }

    /// The group ⊕_{k>=start} (Z/p^kZ)^{d_k} as a catalogue product.
    pub fn group_from(&self, start: usize) -> Result<Group> {
        let mut specs = Vec::new();
        for (k, _) in self.generators_from(start).iter() {
            specs.push(GroupSpec::Cyclic(self.p.pow(*k as u32)));
        }
        Group::new(GroupSpec::Product(specs))
    }

    /// Largest exponent with a positive multiplicity.
    pub fn max_exponent(&self) -> usize {
        self.parts
            .iter()
            .rposition(|&d| d > 0)
            .map(|i| i + 1)
            .expect("positive part")
    }

    /// Block shape (d_i, …, d_m) with empty blocks skipped.
    pub fn shape_from(&self, start: usize) -> BlockShape {
        let parts: Vec<usize> = self.parts[start - 1..]
            .iter()
            .copied()
            .filter(|&d| d > 0)
            .collect();
        BlockShape::new(parts)
    }
}

enum EndoKind {
    /// (f, γ) ↦ (φ∘f, γ).
    BaseLift(GroupHom),
    /// (f, γ) ↦ (φ*(f), φ(γ)); base abelian.
    TopPush(GroupHom),
    /// (v, g) ↦ (vY, g) under the module identification.
    MatrixInduced { ring: CoeffRing, d: usize, y: RingMatrix },
    /// The scaled map a_{k,j}1 ↦ Σ p^{r-k} a_{r,s}·m_{f(k,j),f(r,s)} of
    /// the witness pipeline, extended by left Γ-equivariance. `lift` is
    /// an integer matrix over Z[Γ] with below-diagonal blocks zero.
    ScaledModule {
        basis: PGroupBasis,
        start: usize,
        lift: RingMatrix,
    },
    /// Explicit finite table keyed by canonical element keys.
    Explicit(Arc<BTreeMap<(Vec<(Payload, Payload)>, Payload), WreathElement>>),
    Composite(Vec<WreathEndo>),
}

impl fmt::Debug for EndoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EndoKind::BaseLift(_) => "base_lift",
            EndoKind::TopPush(_) => "top_push",
            EndoKind::MatrixInduced { .. } => "matrix_induced",
            EndoKind::ScaledModule { .. } => "scaled_module",
            EndoKind::Explicit(_) => "explicit",
            EndoKind::Composite(_) => "composite",
        };
        write!(f, "{name}")
    }
}

/// A verified structured homomorphism between wreath products.
#[derive(Debug, Clone)]
pub struct WreathEndo {
    source: WreathProduct,
    target: WreathProduct,
    kind: Arc<EndoKind>,
}

impl WreathEndo {
    fn verified(source: WreathProduct, target: WreathProduct, kind: EndoKind) -> Result<WreathEndo> {
        let endo = WreathEndo {
            source,
            target,
            kind: Arc::new(kind),
        };
        endo.verify_homomorphism()?;
        Ok(endo)
    }

    pub fn source(&self) -> &WreathProduct {
        &self.source
    }

    pub fn target(&self) -> &WreathProduct {
        &self.target
    }

    pub fn kind_name(&self) -> String {
        format!("{:?}", self.kind)
    }

    fn verify_homomorphism(&self) -> Result<()> {
        let check = |a: &WreathElement, b: &WreathElement| -> Result<()> {
            let lhs = self.apply(&self.source.mul(a, b)?)?;
            let rhs = self.target.mul(&self.apply(a)?, &self.apply(b)?)?;
            if lhs != rhs {
                return Err(Error::NotAHomomorphism(format!("({a}, {b})")));
            }
            Ok(())
        };
        match self.source.order() {
            Some(order) if order <= ENDO_EXHAUSTIVE_CAP => {
                let all = self.source.enumerate()?;
                for a in &all {
                    for b in &all {
                        check(a, b)?;
                    }
                }
            }
            _ => {
                let mut rng = SplitMix64::new(INTERNAL_CHECK_SEED);
                for _ in 0..ENDO_SAMPLE_PAIRS {
                    let a = self.source.random_element(&mut rng);
                    let b = self.source.random_element(&mut rng);
                    check(&a, &b)?;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, w: &WreathElement) -> Result<WreathElement> {
        if w.wreath != self.source {
            return Err(Error::Mismatch);
        }
        match &*self.kind {
            EndoKind::BaseLift(phi) => {
                let terms = w
                    .base_fn
                    .iter()
                    .map(|(pt, val)| Ok((pt.clone(), phi.apply(val)?)))
                    .collect::<Result<Vec<_>>>()?;
                self.target.element(terms, w.top.clone())
            }
            EndoKind::TopPush(phi) => {
                let terms = w
                    .base_fn
                    .iter()
                    .map(|(pt, val)| Ok((phi.apply(pt)?, val.clone())))
                    .collect::<Result<Vec<_>>>()?;
                self.target.element(terms, phi.apply(&w.top)?)
            }
            EndoKind::MatrixInduced { ring, d, y } => {
                let v = base_fn_to_vector(ring, y.group(), *d, w)?;
                let image = y.row_action(&v)?;
                vector_to_base_fn(&self.target, &image, w.top.clone())
            }
            EndoKind::ScaledModule { basis, start, lift } => {
                apply_scaled_module(&self.target, basis, *start, lift, w)
            }
            EndoKind::Explicit(table) => table
                .get(&w.key())
                .cloned()
                .ok_or(Error::Mismatch),
            EndoKind::Composite(list) => {
                let mut acc = w.clone();
                for e in list {
                    acc = e.apply(&acc)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn compose(&self, first: &WreathEndo) -> Result<WreathEndo> {
        if first.target != self.source {
            return Err(Error::Mismatch);
        }
        WreathEndo::verified(
            first.source.clone(),
            self.target.clone(),
            EndoKind::Composite(vec![first.clone(), self.clone()]),
        )
    }

    /// Exhaustive image size and kernel on a finite source.
    pub fn image_kernel(&self) -> Result<(u64, Vec<WreathElement>)> {
        let all = self.source.enumerate()?;
        let mut image = BTreeSet::new();
        let mut kernel = Vec::new();
        for w in &all {
            let y = self.apply(w)?;
            if y.is_identity() {
                kernel.push(w.clone());
            }
            image.insert(y.key());
        }
        Ok((image.len() as u64, kernel))
    }

    pub fn is_surjective(&self) -> Result<bool> {
        let (image, _) = self.image_kernel()?;
        Ok(Some(image) == self.target.order())
    }

    pub fn is_injective(&self) -> Result<bool> {
        let (_, kernel) = self.image_kernel()?;
        Ok(kernel.len() == 1)
    }

    pub fn is_bijective(&self) -> Result<bool> {
        Ok(self.is_surjective()? && self.is_injective()?)
    }

    /// True iff the image of the base group lies in the base group
    /// (exhaustive over the finite base group).
    pub fn is_basic(&self) -> Result<bool> {
        let all = self.source.enumerate()?;
        for w in &all {
            if w.in_base() && !self.apply(w)?.in_base() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// Lifts a base epimorphism φ: Δ→Δ' to Δ≀Γ → Δ'≀Γ, (f,γ) ↦ (φ∘f, γ).
pub fn hom_from_base_epi(phi: &GroupHom, top: &Group) -> Result<WreathEndo> {
    let source = WreathProduct::new(phi.source().clone(), top.clone());
    let target = WreathProduct::new(phi.target().clone(), top.clone());
    WreathEndo::verified(source, target, EndoKind::BaseLift(phi.clone()))
}

/// Pushes a top epimorphism φ: Γ→Γ' to A≀Γ → A≀Γ',
/// (f,γ) ↦ (φ*(f), φ(γ)); requires an abelian base.
pub fn hom_from_top_epi(phi: &GroupHom, base: &Group) -> Result<WreathEndo> {
    if !base.is_abelian() {
        return Err(Error::NonAbelianBase);
    }
    let source = WreathProduct::new(base.clone(), phi.source().clone());
    let target = WreathProduct::new(base.clone(), phi.target().clone());
    WreathEndo::verified(source, target, EndoKind::TopPush(phi.clone()))
}

/// The base group (Z/nZ)^d as a catalogue product; n = 0 gives Z^d.
pub fn module_base_group(n: u64, d: usize) -> Result<Group> {
    if n == 0 {
        Ok(Group::free_abelian(d))
    } else {
        Group::new(GroupSpec::Product(vec![GroupSpec::Cyclic(n); d]))
    }
}

fn coeff_ring_for_modulus(n: u64) -> CoeffRing {
    if n == 0 {
        CoeffRing::Integers
    } else {
        CoeffRing::z_mod(n)
    }
}

/// Identifies f ∈ ((Z/nZ)^d)[Γ] with (f_1, …, f_d) ∈ R^d.
fn base_fn_to_vector(
    ring: &CoeffRing,
    group: &Group,
    d: usize,
    w: &WreathElement,
) -> Result<Vec<GroupRingElement>> {
    let mut comps: Vec<Vec<(GroupElement, RingScalar)>> = vec![Vec::new(); d];
    for (pt, val) in &w.base_fn {
        let coords = tuple_coords(val)?;
        for (i, c) in coords.iter().enumerate() {
            if *c != 0 {
                comps[i].push((pt.clone(), ring.from_int(*c)));
            }
        }
    }
    comps
        .into_iter()
        .map(|terms| GroupRingElement::new(ring.clone(), group.clone(), terms))
        .collect()
}

fn vector_to_base_fn(
    target: &WreathProduct,
    v: &[GroupRingElement],
    top: GroupElement,
) -> Result<WreathElement> {
    let mut by_point: BTreeMap<Payload, Vec<i64>> = BTreeMap::new();
    let d = v.len();
    for (i, comp) in v.iter().enumerate() {
        for (g, c) in comp.support() {
            let entry = by_point
                .entry(g.payload().clone())
                .or_insert_with(|| vec![0; d]);
            entry[i] = scalar_to_i64(c)?;
        }
    }
    let top_group = target.top().clone();
    let base_group = target.base().clone();
    let terms = by_point
        .into_iter()
        .map(|(pt, coords)| {
            let pt = top_group.element(pt)?;
            let val = coords_to_tuple(&base_group, &coords)?;
            Ok((pt, val))
        })
        .collect::<Result<Vec<_>>>()?;
    target.element(terms, top)
}

fn tuple_coords(val: &GroupElement) -> Result<Vec<i64>> {
    match val.payload() {
        Payload::Tuple(parts) => parts
            .iter()
            .map(|p| match p {
                Payload::Residue(r) => Ok(*r as i64),
                Payload::Int(n) => n.to_i64().ok_or(Error::Mismatch),
                _ => Err(Error::Mismatch),
            })
            .collect(),
        // Rank-d free abelian payloads.
        Payload::Vector(parts) => parts
            .iter()
            .map(|n| n.to_i64().ok_or(Error::Mismatch))
            .collect(),
        _ => Err(Error::Mismatch),
    }
}

fn coords_to_tuple(base: &Group, coords: &[i64]) -> Result<GroupElement> {
    match base.spec() {
        GroupSpec::Product(specs) => {
            let parts = specs
                .iter()
                .zip(coords)
                .map(|(s, &c)| match s {
                    GroupSpec::Cyclic(n) if *n > 0 => {
                        Ok(Payload::Residue(c.rem_euclid(*n as i64) as u64))
                    }
                    GroupSpec::Cyclic(0) => Ok(Payload::Int(BigInt::from(c))),
                    _ => Err(Error::Mismatch),
                })
                .collect::<Result<Vec<_>>>()?;
            base.element(Payload::Tuple(parts))
        }
        GroupSpec::FreeAbelian(_) => {
            base.element(Payload::Vector(coords.iter().map(|&c| BigInt::from(c)).collect()))
        }
        _ => Err(Error::Mismatch),
    }
}

fn scalar_to_i64(c: &RingScalar) -> Result<i64> {
    match &c.repr {
        ScalarRepr::Residue(r) => Ok(*r as i64),
        ScalarRepr::Int(n) => n.to_i64().ok_or(Error::Mismatch),
        ScalarRepr::Poly(v) => Ok(v.first().copied().unwrap_or(0) as i64),
        _ => Err(Error::Mismatch),
    }
}

/// The endomorphism (v, g) ↦ (vY, g) of (Z/nZ)^d ≀ Γ induced by a d×d
/// matrix Y over (Z/nZ)[Γ]; left-Γ-equivariant by construction.
pub fn endo_from_matrix(n: u64, d: usize, y: &RingMatrix) -> Result<WreathEndo> {
    let ring = coeff_ring_for_modulus(n);
    if *y.ring() != ring || y.dim() != d {
        return Err(Error::Mismatch);
    }
    let base = module_base_group(n, d)?;
    let wreath = WreathProduct::new(base, y.group().clone());
    WreathEndo::verified(
        wreath.clone(),
        wreath,
        EndoKind::MatrixInduced {
            ring,
            d,
            y: y.clone(),
        },
    )
}

// ---------------------------------------------------------------------------
// Scaled module maps (witness pipeline)
// ---------------------------------------------------------------------------

fn apply_scaled_module(
    target: &WreathProduct,
    basis: &PGroupBasis,
    start: usize,
    lift: &RingMatrix,
    w: &WreathElement,
) -> Result<WreathElement> {
    let gens = basis.generators_from(start);
    let p = basis.p;
    let top_group = target.top().clone();
    // Accumulate output coordinates per top point.
    let mut acc: BTreeMap<Payload, Vec<i64>> = BTreeMap::new();
    for (pt, val) in &w.base_fn {
        let coords = tuple_coords(val)?;
        for (q, c_q) in coords.iter().enumerate() {
            if *c_q == 0 {
                continue;
            }
            let (k, _) = gens[q];
            for (r_idx, (r, _)) in gens.iter().enumerate() {
                let entry = lift.entry(q, r_idx);
                if entry.is_zero() {
                    continue;
                }
                if r < &k {
                    // Below-diagonal blocks are forced to zero in the lift.
                    return Err(Error::ShapeViolation(*r, k));
                }
                let scale = p.pow((*r - k) as u32) as i64;
                for (g, coeff) in entry.support() {
                    let n_g = scalar_to_i64(coeff)?;
                    let shifted = top_group.mul(pt, g)?;
                    let slot = acc
                        .entry(shifted.payload().clone())
                        .or_insert_with(|| vec![0; gens.len()]);
                    let modulus = p.pow(*r as u32) as i64;
                    slot[r_idx] = (slot[r_idx] + c_q * scale % modulus * n_g).rem_euclid(modulus);
                }
            }
        }
    }
    let base_group = target.base().clone();
    let terms = acc
        .into_iter()
        .map(|(pt, coords)| {
            let pt = top_group.element(pt)?;
            let val = coords_to_tuple(&base_group, &coords)?;
            Ok((pt, val))
        })
        .collect::<Result<Vec<_>>>()?;
    target.element(terms, w.top.clone())
}

/// Report of the Hensel-lifted Hopf-witness pipeline.
#[derive(Debug, Clone)]
pub struct HopfPipelineReport {
    pub generators: usize,
    /// φ̃∘ψ = id exactly on each generator a_{k,j}·1_Γ.
    pub phi_after_psi_is_identity: bool,
    /// φ̃(b_{k,j}·1_Γ) lies in V_k for every generator.
    pub v_containment: bool,
    pub kernel_order: u64,
    pub bijective: Option<bool>,
    /// True when kernel/bijectivity were checked in a bounded window.
    pub bounded: bool,
}

/// Constructs the witness pipeline for P = ⊕_k (Z/p^kZ)^{d_k} restricted
/// to exponents ≥ `start`: lifts Y to Ỹ over Z[Γ] (representatives in
/// [0,p), below-diagonal blocks zero), builds the scaled map φ̃, Hensel
/// lifts the left inverse Z to Z̄ mod p^max_exp, builds ψ from Z̄, and
/// verifies φ̃∘ψ = id on all generators.
pub fn hopf_witness_pipeline(
    basis: &PGroupBasis,
    start: usize,
    y: &RingMatrix,
    z: &RingMatrix,
    kernel_window: Option<i64>,
) -> Result<(WreathEndo, WreathEndo, HopfPipelineReport)> {
    let shape = basis.shape_from(start);
    let d_total = shape.total();
    if y.dim() != d_total || z.dim() != d_total {
        return Err(Error::ShapeMismatch(format!(
            "expected {d_total}x{d_total} matrices"
        )));
    }
    if !is_block_upper(y, &shape)? {
        return Err(Error::ShapeViolation(0, 0));
    }
    if !is_block_upper(z, &shape)? {
        return Err(Error::ShapeViolation(0, 0));
    }
    if !z.mul(y)?.is_identity() {
        return Err(Error::NotLeftInverse);
    }
    let p = basis.p;
    let m = basis.max_exponent() as u32;
    // Integer lifts with representatives in [0, p).
    let y_lift = y.map_entries(|e| e.coeff_lift_gf())?;
    let z_lift = z.map_entries(|e| e.coeff_lift_gf())?;
    let z_bar = hensel_lift(&z_lift, &y_lift, p, m)?;

    let top = y.group().clone();
    let base = basis.group_from(start)?;
    let wreath = WreathProduct::new(base.clone(), top.clone());
    let phi = WreathEndo::verified(
        wreath.clone(),
        wreath.clone(),
        EndoKind::ScaledModule {
            basis: basis.clone(),
            start,
            lift: y_lift.clone(),
        },
    )?;
    let psi = WreathEndo::verified(
        wreath.clone(),
        wreath.clone(),
        EndoKind::ScaledModule {
            basis: basis.clone(),
            start,
            lift: z_bar.clone(),
        },
    )?;

    // Generator elements a_{k,j}·1_Γ.
    let gens = basis.generators_from(start);
    let gen_elem = |idx: usize| -> Result<WreathElement> {
        let mut coords = vec![0i64; gens.len()];
        coords[idx] = 1;
        let val = coords_to_tuple(&base, &coords)?;
        wreath.point_mass(val, top.identity())
    };
    let mut phi_after_psi = true;
    for idx in 0..gens.len() {
        let g = gen_elem(idx)?;
        if phi.apply(&psi.apply(&g)?)? != g {
            phi_after_psi = false;
        }
    }
    // V_k containment: φ̃(b_{k,j}1) with b = p^{k-1}a has all coordinates
    // (r,s) divisible by p^{r-1} and zero for r < k.
    let mut v_containment = true;
    for (idx, (k, _)) in gens.iter().enumerate() {
        let mut coords = vec![0i64; gens.len()];
        coords[idx] = p.pow((*k - 1) as u32) as i64;
        let val = coords_to_tuple(&base, &coords)?;
        let b_elem = wreath.point_mass(val, top.identity())?;
        let image = phi.apply(&b_elem)?;
        for (_, v) in image.base_fn() {
            let cs = tuple_coords(v)?;
            for (r_idx, (r, _)) in gens.iter().enumerate() {
                let c = cs[r_idx];
                if c % p.pow((*r - 1) as u32) as i64 != 0 || (r < k && c != 0) {
                    v_containment = false;
                }
            }
        }
    }
    // Kernel of φ̃ on base functions; exact for finite Γ, windowed for Z^r.
    let (kernel_order, bijective, bounded) = if wreath.is_finite() {
        let order = wreath.order().unwrap();
        if order > (1 << 20) {
            return Err(Error::BudgetExceeded {
                needed: order,
                budget: 1 << 20,
            });
        }
        let (image, kernel) = phi.image_kernel()?;
        let bij = Some(image == order && kernel.len() == 1);
        (kernel.len() as u64, bij, false)
    } else {
        let w = kernel_window.unwrap_or(1);
        let positions = crate::matrices::window_elements(&top, w)?;
        let base_elems = base.enumerate()?;
        let mut kernel = 0u64;
        let mut idx = vec![0usize; positions.len()];
        'outer: loop {
            let terms: Vec<(GroupElement, GroupElement)> = positions
                .iter()
                .zip(&idx)
                .map(|(pt, &i)| (pt.clone(), base_elems[i].clone()))
                .collect();
            let w_elem = wreath.element(terms, top.identity())?;
            if phi.apply(&w_elem)?.is_identity() {
                kernel += 1;
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break 'outer;
                }
                idx[pos] += 1;
                if idx[pos] < base_elems.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
        (kernel, None, true)
    };
    let report = HopfPipelineReport {
        generators: gens.len(),
        phi_after_psi_is_identity: phi_after_psi,
        v_containment,
        kernel_order,
        bijective,
        bounded,
    };
    Ok((phi, psi, report))
}

// ---------------------------------------------------------------------------
// Augment-abelianize
// ---------------------------------------------------------------------------

/// (f, γ) ↦ (ε(f), Ab(γ)): the abelianisation pair; requires an abelian
/// base. Returns the pair together with the abelianization data of Γ.
pub fn augment_abelianize(w: &WreathElement) -> Result<(GroupElement, GroupElement)> {
    let wreath = w.wreath();
    if !wreath.base().is_abelian() {
        return Err(Error::NonAbelianBase);
    }
    let base = wreath.base();
    let mut eps = base.identity();
    for (_, v) in w.base_fn() {
        eps = base.mul(&eps, v)?;
    }
    let (_, ab_hom) = wreath.top().abelianization()?;
    let ab_top = ab_hom.apply(w.top())?;
    Ok((eps, ab_top))
}

// ---------------------------------------------------------------------------
// Subgroup scans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SubgroupRecord {
    pub order: u64,
    pub abelian: bool,
    pub normal: bool,
    pub basic: bool,
    /// For abelian normal non-basic subgroups: the three conclusions
    /// (exponent-2 base, central order-2 top, equality with the kernel).
    pub conclusions: Option<(bool, bool, bool)>,
}

#[derive(Debug, Clone)]
pub struct AbelianNormalReport {
    pub wreath_order: u64,
    pub subgroups_scanned: u64,
    pub records: Vec<SubgroupRecord>,
}

/// Enumerates all subgroups of a finite wreath product (closure over
/// subsets seeded by cyclic subgroups), flags abelian normal non-basic
/// ones, and checks the three structural conclusions on each.
pub fn classify_abelian_normal(
    wreath: &WreathProduct,
    budget: u64,
) -> Result<AbelianNormalReport> {
    let order = wreath.order().ok_or(Error::InfiniteGroup)?;
    // The scan materializes an order×order multiplication table; cap the
    // effective budget at desk scale regardless of the caller's limit.
    let budget = budget.min(4096);
    if order > budget {
        return Err(Error::BudgetExceeded {
            needed: order,
            budget,
        });
    }
    let all = wreath.enumerate()?;
    let index: BTreeMap<_, usize> = all
        .iter()
        .enumerate()
        .map(|(i, w)| (w.key(), i))
        .collect();
    let n = all.len();
    let mut mul = vec![vec![0usize; n]; n];
    let mut inv = vec![0usize; n];
    for i in 0..n {
        inv[i] = index[&wreath.inv(&all[i])?.key()];
        for j in 0..n {
            mul[i][j] = index[&wreath.mul(&all[i], &all[j])?.key()];
        }
    }
    let id = index[&wreath.identity().key()];

    let close = |seed: &BTreeSet<usize>| -> Vec<usize> {
        let mut set = seed.clone();
        set.insert(id);
        loop {
            let mut grew = false;
            let snapshot: Vec<usize> = set.iter().copied().collect();
            for &a in &snapshot {
                if set.insert(inv[a]) {
                    grew = true;
                }
                for &b in &snapshot {
                    if set.insert(mul[a][b]) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return set.into_iter().collect();
            }
        }
    };

    // All subgroups: seed with cyclic subgroups, then adjoin one element
    // at a time until the collection is closed.
    let mut subgroups: BTreeSet<Vec<usize>> = BTreeSet::new();
    for g in 0..n {
        subgroups.insert(close(&BTreeSet::from([g])));
    }
    loop {
        let mut grew = false;
        let snapshot: Vec<Vec<usize>> = subgroups.iter().cloned().collect();
        for h in &snapshot {
            for g in 0..n {
                if h.binary_search(&g).is_ok() {
                    continue;
                }
                let mut seed: BTreeSet<usize> = h.iter().copied().collect();
                seed.insert(g);
                if subgroups.insert(close(&seed)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }

    let mut records = Vec::new();
    for h in &subgroups {
        let abelian = h
            .iter()
            .all(|&a| h.iter().all(|&b| mul[a][b] == mul[b][a]));
        let normal = (0..n).all(|g| {
            h.iter()
                .all(|&x| h.binary_search(&mul[mul[g][x]][inv[g]]).is_ok())
        });
        let basic = h.iter().all(|&x| all[x].in_base());
        let conclusions = if abelian && normal && !basic {
            Some(check_abelian_normal_conclusions(wreath, &all, h)?)
        } else {
            None
        };
        records.push(SubgroupRecord {
            order: h.len() as u64,
            abelian,
            normal,
            basic,
            conclusions,
        });
    }
    Ok(AbelianNormalReport {
        wreath_order: order,
        subgroups_scanned: subgroups.len() as u64,
        records,
    })
}

fn check_abelian_normal_conclusions(
    wreath: &WreathProduct,
    all: &[WreathElement],
    subgroup: &[usize],
) -> Result<(bool, bool, bool)> {
    let base = wreath.base();
    let top = wreath.top();
    // (1) the base group A has exponent 2.
    let c1 = base
        .enumerate()?
        .iter()
        .all(|a| base.mul(a, a).map(|s| s.is_identity()).unwrap_or(false));
    // (2) the non-identity tops of N form {γ} with γ central of order 2.
    let tops: BTreeSet<Payload> = subgroup
        .iter()
        .map(|&i| all[i].top().payload().clone())
        .collect();
    let non_id: Vec<Payload> = tops
        .iter()
        .filter(|p| **p != *top.identity().payload())
        .cloned()
        .collect();
    let (c2, gamma) = if non_id.len() == 1 {
        let gamma = top.element(non_id[0].clone())?;
        let order2 = top.mul(&gamma, &gamma)?.is_identity();
        let central = top
            .enumerate()?
            .iter()
            .all(|g| top.mul(&gamma, g).unwrap() == top.mul(g, &gamma).unwrap());
        (order2 && central, Some(gamma))
    } else {
        (false, None)
    };
    // (3) N equals the kernel of A≀Γ → A≀(Γ/<γ>).
    let c3 = if let Some(gamma) = gamma {
        let quot = GroupHom::quotient_map(top, &gamma)?;
        let endo = hom_from_top_epi(&quot, base)?;
        let (_, kernel) = endo.image_kernel()?;
        let kernel_keys: BTreeSet<_> = kernel.iter().map(|w| w.key()).collect();
        let subgroup_keys: BTreeSet<_> = subgroup.iter().map(|&i| all[i].key()).collect();
        kernel_keys == subgroup_keys
    } else {
        false
    };
    Ok((c1, c2, c3))
}

// ---------------------------------------------------------------------------
// Basic-endomorphism normalization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NormalizationCertificate {
    pub kernel_order_phi: u64,
    pub kernel_order_psi: u64,
    pub kernels_in_base: bool,
    pub base_image_is_base: bool,
}

/// Normalizes a surjective basic endomorphism Φ of a finite A≀Γ into
/// ψ(f, γ) = ((α⁻¹)*(Φ|_base(f)), γ) where α is the top automorphism
/// induced by Φ; kernels of Φ and ψ have equal order and lie in the base.
pub fn normalize_basic_endo(phi: &WreathEndo) -> Result<(WreathEndo, NormalizationCertificate)> {
    let wreath = phi.source().clone();
    if phi.target() != &wreath {
        return Err(Error::Mismatch);
    }
    if !wreath.base().is_abelian() {
        return Err(Error::NonAbelianBase);
    }
    if !phi.is_surjective()? {
        return Err(Error::NotSurjective);
    }
    if !phi.is_basic()? {
        return Err(Error::NotBasic);
    }
    let top = wreath.top().clone();
    // α(γ) = top of Φ(0, γ); an automorphism since Γ is finite and Φ onto.
    let phi_for_alpha = phi.clone();
    let wreath_for_alpha = wreath.clone();
    let top_t = top.clone();
    let alpha = GroupHom::new(top.clone(), top.clone(), move |g| {
        let w = wreath_for_alpha.top_element(g.clone()).unwrap();
        let img = phi_for_alpha.apply(&w).unwrap();
        top_t.element(img.top().payload().clone()).unwrap()
    })?;
    if !alpha.is_injective()? || !alpha.is_surjective()? {
        return Err(Error::NotSurjective);
    }
    // α⁻¹ as an explicit table hom.
    let pairs: BTreeMap<Payload, Payload> = top
        .enumerate()?
        .iter()
        .map(|g| {
            (
                alpha.apply(g).unwrap().payload().clone(),
                g.payload().clone(),
            )
        })
        .collect();
    let top_t = top.clone();
    let pairs = Arc::new(pairs);
    let alpha_inv = GroupHom::new(top.clone(), top.clone(), move |g| {
        top_t.element(pairs[g.payload()].clone()).unwrap()
    })?;

    // ψ(f, γ) = ((α⁻¹)* Φ_base(f), γ), built as an explicit table.
    let mut table = BTreeMap::new();
    for w in wreath.enumerate()? {
        let base_part = wreath.element(w.base_fn().to_vec(), top.identity())?;
        let img = phi.apply(&base_part)?;
        // Push the image (which is basic) through (α⁻¹)* on coordinates.
        let terms = img
            .base_fn()
            .iter()
            .map(|(pt, val)| Ok((alpha_inv.apply(pt)?, val.clone())))
            .collect::<Result<Vec<_>>>()?;
        let out = wreath.element(terms, w.top().clone())?;
        table.insert(w.key(), out);
    }
    let psi = WreathEndo::verified(
        wreath.clone(),
        wreath.clone(),
        EndoKind::Explicit(Arc::new(table)),
    )?;

    let (_, ker_phi) = phi.image_kernel()?;
    let (_, ker_psi) = psi.image_kernel()?;
    let kernels_in_base = ker_phi.iter().all(|w| w.in_base())
        && ker_psi.iter().all(|w| w.in_base());
    // Φ(A[Γ]) = A[Γ]: image of the base group equals the base group.
    let mut base_image = BTreeSet::new();
    for w in wreath.enumerate()? {
        if w.in_base() {
            base_image.insert(phi.apply(&w)?.key());
        }
    }
    let base_count = wreath
        .enumerate()?
        .iter()
        .filter(|w| w.in_base())
        .count();
    let base_image_is_base = base_image.len() == base_count
        && base_image.iter().all(|k| k.1 == *top.identity().payload());
    let cert = NormalizationCertificate {
        kernel_order_phi: ker_phi.len() as u64,
        kernel_order_psi: ker_psi.len() as u64,
        kernels_in_base,
        base_image_is_base,
    };
    Ok((psi, cert))
}

// ---------------------------------------------------------------------------
// The D8 example
// ---------------------------------------------------------------------------

/// A non-basic automorphism of C2≀C2 ≅ D8 (the vertex–edge swap outer
/// automorphism composed with an inner one), determined by the generator
/// images a=δ_(0) ↦ ab·t, b=δ_(1) ↦ t, t ↦ a. The image of the base
/// group is the other Klein four-subgroup {e, ab, t, ab·t}, so the map
/// is not basic.
pub fn d8_nonbasic_automorphism() -> Result<(WreathEndo, WreathElement)> {
    let c2 = Group::cyclic(2);
    let wreath = WreathProduct::new(c2.clone(), c2.clone());
    let one = c2.element(Payload::Residue(1))?;
    let zero_pt = c2.element(Payload::Residue(0))?;
    let one_pt = c2.element(Payload::Residue(1))?;
    let a = wreath.point_mass(one.clone(), zero_pt.clone())?;
    let b = wreath.point_mass(one.clone(), one_pt.clone())?;
    let t = wreath.top_element(one.clone())?;
    let ab = wreath.mul(&a, &b)?;
    let abt = wreath.mul(&ab, &t)?;
    // Generator images.
    let img_a = abt;
    let img_b = t.clone();
    let img_t = a.clone();
    // σ(a^x b^y t^γ) = A^x B^y T^γ.
    let mut table = BTreeMap::new();
    for w in wreath.enumerate()? {
        let x = !w.value_at(&zero_pt).is_identity();
        let y = !w.value_at(&one_pt).is_identity();
        let g = !w.top().is_identity();
        let mut out = wreath.identity();
        if x {
            out = wreath.mul(&out, &img_a)?;
        }
        if y {
            out = wreath.mul(&out, &img_b)?;
        }
        if g {
            out = wreath.mul(&out, &img_t)?;
        }
        table.insert(w.key(), out);
    }
    let endo = WreathEndo::verified(
        wreath.clone(),
        wreath.clone(),
        EndoKind::Explicit(Arc::new(table)),
    )?;
    // Witness that the map is not basic: b = δ_(1) maps to t.
    Ok((endo, b))
}

/// Verifies that a finite wreath product is isomorphic to a table group
/// by an explicit generator-image check over all element pairs.
pub fn isomorphic_by_table(wreath: &WreathProduct, other: &Group) -> Result<bool> {
    let wa = wreath.enumerate()?;
    let ob = other.enumerate()?;
    if wa.len() != ob.len() {
        return Ok(false);
    }
    // Brute-force search over generator images is unnecessary for the
    // desk-scale instances here: build the wreath's own table group and
    // compare through every bijection induced by mapping a generating
    // set; instead we check the standard invariants and search for an
    // isomorphism by backtracking on element images.
    let n = wa.len();
    let index_w: BTreeMap<_, usize> = wa.iter().enumerate().map(|(i, w)| (w.key(), i)).collect();
    let index_o: BTreeMap<_, usize> = ob
        .iter()
        .enumerate()
        .map(|(i, e)| (e.payload().clone(), i))
        .collect();
    let mut mul_w = vec![vec![0usize; n]; n];
    let mut mul_o = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            mul_w[i][j] = index_w[&wreath.mul(&wa[i], &wa[j])?.key()];
            mul_o[i][j] = index_o[other.mul(&ob[i], &ob[j])?.payload()];
        }
    }
    // Element orders partition candidates.
    let order_of = |mul: &Vec<Vec<usize>>, id: usize, x: usize| -> usize {
        let mut acc = x;
        let mut k = 1;
        while acc != id {
            acc = mul[acc][x];
            k += 1;
        }
        k
    };
    let id_w = index_w[&wreath.identity().key()];
    let id_o = index_o[other.identity().payload()];
    let ord_w: Vec<usize> = (0..n).map(|x| order_of(&mul_w, id_w, x)).collect();
    let ord_o: Vec<usize> = (0..n).map(|x| order_of(&mul_o, id_o, x)).collect();

    fn backtrack(
        mul_w: &Vec<Vec<usize>>,
        mul_o: &Vec<Vec<usize>>,
        ord_w: &[usize],
        ord_o: &[usize],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        pos: usize,
    ) -> bool {
        let n = map.len();
        if pos == n {
            return true;
        }
        if map[pos].is_some() {
            return backtrack(mul_w, mul_o, ord_w, ord_o, map, used, pos + 1);
        }
        for cand in 0..n {
            if used[cand] || ord_o[cand] != ord_w[pos] {
                continue;
            }
            map[pos] = Some(cand);
            used[cand] = true;
            let mut ok = true;
            'check: for i in 0..n {
                for j in 0..n {
                    if let (Some(mi), Some(mj)) = (map[i], map[j]) {
                        if let Some(mk) = map[mul_w[i][j]] {
                            if mul_o[mi][mj] != mk {
                                ok = false;
                                break 'check;
                            }
                        }
                    }
                }
            }
            if ok && backtrack(mul_w, mul_o, ord_w, ord_o, map, used, pos + 1) {
                return true;
            }
            map[pos] = None;
            used[cand] = false;
        }
        false
    }
    let mut map = vec![None; n];
    let mut used = vec![false; n];
    map[id_w] = Some(id_o);
    used[id_o] = true;
    Ok(backtrack(&mul_w, &mul_o, &ord_w, &ord_o, &mut map, &mut used, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::solve_right_inverse;
    use crate::rings::make_gf;

    fn c2_wr_c2() -> WreathProduct {
        let c2 = Group::cyclic(2);
        WreathProduct::new(c2.clone(), c2)
    }

    fn f2() -> CoeffRing {
        make_gf(2, 1).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let w = c2_wr_c2();
        for v in w.enumerate().unwrap() {
            assert_eq!(w.mul(&w.identity(), &v).unwrap(), v);
            assert_eq!(w.mul(&v, &w.identity()).unwrap(), v);
            let inv = w.inv(&v).unwrap();
            assert!(w.mul(&v, &inv).unwrap().is_identity());
        }
    }

    #[test]
    fn shift_then_add_square() {
        // ((1,0), 1)^2 = ((1,1), 0) in C2≀C2.
        let w = c2_wr_c2();
        let c2 = w.base().clone();
        let one = c2.element(Payload::Residue(1)).unwrap();
        let pt0 = c2.element(Payload::Residue(0)).unwrap();
        let pt1 = c2.element(Payload::Residue(1)).unwrap();
        let u = w
            .element(vec![(pt0.clone(), one.clone())], one.clone())
            .unwrap();
        let sq = w.mul(&u, &u).unwrap();
        let expected = w
            .element(
                vec![(pt0, one.clone()), (pt1, one.clone())],
                c2.identity(),
            )
            .unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn wreath_axioms_exhaustive_small() {
        for w in [
            c2_wr_c2(),
            WreathProduct::new(Group::cyclic(3), Group::cyclic(2)),
        ] {
            let all = w.enumerate().unwrap();
            assert_eq!(all.len() as u64, w.order().unwrap());
            for a in &all {
                for b in &all {
                    for c in &all {
                        let l = w.mul(&w.mul(a, b).unwrap(), c).unwrap();
                        let r = w.mul(a, &w.mul(b, c).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn wreath_axioms_sampled_for_infinite_top() {
        let w = WreathProduct::new(Group::cyclic(2), Group::infinite_cyclic());
        assert!(!w.is_finite());
        let mut rng = SplitMix64::new(11);
        for _ in 0..1000 {
            let a = w.random_element(&mut rng);
            let b = w.random_element(&mut rng);
            let c = w.random_element(&mut rng);
            let left = w.mul(&w.mul(&a, &b).unwrap(), &c).unwrap();
            let right = w.mul(&a, &w.mul(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
            let inv = w.inv(&a).unwrap();
            assert!(w.mul(&a, &inv).unwrap().is_identity());
            assert!(w.mul(&inv, &a).unwrap().is_identity());
        }
    }

    #[test]
    fn c2_wr_c2_is_d8() {
        let w = c2_wr_c2();
        assert_eq!(w.order(), Some(8));
        let d8 = crate::groups::tests_d8_table();
        assert!(isomorphic_by_table(&w, &d8).unwrap());
    }

    #[test]
    fn centre_of_small_wreaths() {
        // C2≀C2: centre {e, ((1,1),0)}.
        let w = c2_wr_c2();
        let z = w.centre(DEFAULT_WREATH_BUDGET).unwrap();
        assert_eq!(z.len(), 2);
        // C2≀C3: centre {e, (1,1,1)}.
        let w = WreathProduct::new(Group::cyclic(2), Group::cyclic(3));
        let z = w.centre(DEFAULT_WREATH_BUDGET).unwrap();
        assert_eq!(z.len(), 2);
        // C3≀1: abelian, centre is everything.
        let w = WreathProduct::new(Group::cyclic(3), Group::trivial());
        let z = w.centre(DEFAULT_WREATH_BUDGET).unwrap();
        assert_eq!(z.len(), 3);
    }

    #[test]
    fn base_epi_identity_lift_is_identity() {
        let c2 = Group::cyclic(2);
        let endo = hom_from_base_epi(&GroupHom::identity(&c2), &Group::cyclic(3)).unwrap();
        for w in endo.source().enumerate().unwrap() {
            assert_eq!(endo.apply(&w).unwrap(), w);
        }
    }

    #[test]
    fn base_epi_lift() {
        // φ: C4→C2 lifted over Γ=C2: surjective onto the order-8 wreath
        // with kernel (ker φ)^Γ of size 4.
        let c4 = Group::cyclic(4);
        let phi = GroupHom::cyclic_reduction(&c4, 2).unwrap();
        let endo = hom_from_base_epi(&phi, &Group::cyclic(2)).unwrap();
        assert_eq!(endo.source().order(), Some(32));
        let (image, kernel) = endo.image_kernel().unwrap();
        assert_eq!(image, 8);
        assert!(endo.is_surjective().unwrap());
        assert_eq!(kernel.len(), 4);
        // Trivial φ: C2→C2 via the trivial group composition is not
        // surjective: image is just the top copy.
        let c2 = Group::cyclic(2);
        let triv = GroupHom::new(c2.clone(), c2.clone(), {
            let tgt = c2.clone();
            move |_| tgt.identity()
        })
        .unwrap();
        let endo = hom_from_base_epi(&triv, &Group::cyclic(2)).unwrap();
        assert!(!endo.is_surjective().unwrap());
        let (image, _) = endo.image_kernel().unwrap();
        assert_eq!(image, 2);
    }

    #[test]
    fn top_epi_push() {
        // A=C2, φ: C4→C2: C2≀C4 → C2≀C2 surjective with kernel order 8.
        let c4 = Group::cyclic(4);
        let phi = GroupHom::cyclic_reduction(&c4, 2).unwrap();
        let endo = hom_from_top_epi(&phi, &Group::cyclic(2)).unwrap();
        assert_eq!(endo.source().order(), Some(64));
        assert_eq!(endo.target().order(), Some(8));
        assert!(endo.is_surjective().unwrap());
        let (_, kernel) = endo.image_kernel().unwrap();
        assert_eq!(kernel.len(), 8);
        // Non-abelian base is rejected.
        let s3 = Group::symmetric(3).unwrap();
        assert_eq!(
            hom_from_top_epi(&phi, &s3).unwrap_err(),
            Error::NonAbelianBase
        );
    }

    #[test]
    fn top_epi_to_trivial() {
        let c2 = Group::cyclic(2);
        let phi = GroupHom::to_trivial(&c2);
        let endo = hom_from_top_epi(&phi, &c2).unwrap();
        let (image, _) = endo.image_kernel().unwrap();
        assert_eq!(image, 2); // A≀1 ≅ C2
    }

    #[test]
    fn matrix_induced_endo_shift_is_bijective() {
        // n=2, d=1, Γ=C3, Y=[s]: a base shift, bijective on order 24.
        let ring = CoeffRing::z_mod(2);
        let c3 = Group::cyclic(3);
        let s = GroupRingElement::term(
            ring.clone(),
            c3.element(Payload::Residue(1)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let endo = endo_from_matrix(2, 1, &RingMatrix::from_element(s)).unwrap();
        assert_eq!(endo.source().order(), Some(24));
        assert!(endo.is_bijective().unwrap());
        // Y=I is the identity.
        let endo = endo_from_matrix(2, 1, &RingMatrix::identity(ring.clone(), c3.clone(), 1)).unwrap();
        for w in endo.source().enumerate().unwrap() {
            assert_eq!(endo.apply(&w).unwrap(), w);
        }
    }

    #[test]
    fn matrix_induced_endo_zero_divisor() {
        // Y=[1+s] over Z/2[C3]: kernel {0, 1+s+s^2} in the base.
        let ring = CoeffRing::z_mod(2);
        let c3 = Group::cyclic(3);
        let s = |k: u64| c3.element(Payload::Residue(k)).unwrap();
        let y = GroupRingElement::new(
            ring.clone(),
            c3.clone(),
            vec![(s(0), ring.one()), (s(1), ring.one())],
        )
        .unwrap();
        let endo = endo_from_matrix(2, 1, &RingMatrix::from_element(y)).unwrap();
        assert!(!endo.is_injective().unwrap());
        assert!(!endo.is_surjective().unwrap());
        let (_, kernel) = endo.image_kernel().unwrap();
        assert_eq!(kernel.len(), 2);
        assert!(kernel.iter().all(|w| w.in_base()));
        // The nonzero kernel element is the all-ones function 1+s+s².
        let nontrivial = kernel.iter().find(|w| !w.is_identity()).unwrap();
        assert_eq!(nontrivial.base_fn().len(), 3);
    }

    #[test]
    fn augment_abelianize_examples() {
        let w = c2_wr_c2();
        let c2 = w.base().clone();
        let one = c2.element(Payload::Residue(1)).unwrap();
        let pt0 = c2.element(Payload::Residue(0)).unwrap();
        // Identity maps to (0, 0).
        let (eps, ab) = augment_abelianize(&w.identity()).unwrap();
        assert!(eps.is_identity() && ab.is_identity());
        // ((1,0), 1) maps to (1, 1).
        let u = w
            .element(vec![(pt0, one.clone())], one.clone())
            .unwrap();
        let (eps, ab) = augment_abelianize(&u).unwrap();
        assert!(!eps.is_identity());
        assert!(!ab.is_identity());
    }

    #[test]
    fn augment_abelianize_over_s3_kills_three_cycles() {
        // C2≀S3: (1_(e) + 1_((12)), (123)) ↦ (0, identity).
        let c2 = Group::cyclic(2);
        let s3 = Group::symmetric(3).unwrap();
        let w = WreathProduct::new(c2.clone(), s3.clone());
        let one = c2.element(Payload::Residue(1)).unwrap();
        let e_pt = s3.identity();
        let swap = s3.element(Payload::Perm(vec![1, 0, 2])).unwrap();
        let cycle = s3.element(Payload::Perm(vec![1, 2, 0])).unwrap();
        let u = w
            .element(vec![(e_pt, one.clone()), (swap, one.clone())], cycle)
            .unwrap();
        let (eps, ab) = augment_abelianize(&u).unwrap();
        assert!(eps.is_identity()); // 1 + 1 = 0 in C2
        assert!(ab.is_identity()); // 3-cycles die in Ab(S3) = C2
    }

    #[test]
    fn augment_abelianize_is_hom_with_right_kernel_order() {
        let w = c2_wr_c2();
        let all = w.enumerate().unwrap();
        let mut kernel = 0u64;
        for u in &all {
            let (e1, a1) = augment_abelianize(u).unwrap();
            if e1.is_identity() && a1.is_identity() {
                kernel += 1;
            }
            for v in &all {
                let (e2, a2) = augment_abelianize(v).unwrap();
                let (ep, ap) = augment_abelianize(&w.mul(u, v).unwrap()).unwrap();
                assert_eq!(ep, w.base().mul(&e1, &e2).unwrap());
                assert_eq!(ap, a1.group().mul(&a1, &a2).unwrap());
            }
        }
        // |ker| = |A≀Γ| / (|A|·|Ab(Γ)|) = 8 / 4 = 2.
        assert_eq!(kernel, 2);
    }

    #[test]
    fn d8_automorphism_is_nonbasic() {
        let (endo, witness) = d8_nonbasic_automorphism().unwrap();
        assert!(endo.is_bijective().unwrap());
        assert!(!endo.is_basic().unwrap());
        assert!(witness.in_base());
        assert!(!endo.apply(&witness).unwrap().in_base());
        // δ_(1) maps to the top generator t = ((0,0),1).
        let img = endo.apply(&witness).unwrap();
        assert!(img.base_fn().is_empty());
        assert!(!img.top().is_identity());
        // The map has finite order in Aut(D8): iterating returns to id.
        let mut power = endo.clone();
        let mut order = 1;
        loop {
            let is_id = power
                .source()
                .enumerate()
                .unwrap()
                .iter()
                .all(|w| power.apply(w).unwrap() == *w);
            if is_id {
                break;
            }
            power = endo.compose(&power).unwrap();
            order += 1;
            assert!(order <= 16);
        }
        assert_eq!(order, 4);
    }

    #[test]
    fn abelian_normal_scan_on_d8() {
        let w = c2_wr_c2();
        let report = classify_abelian_normal(&w, DEFAULT_WREATH_BUDGET).unwrap();
        // D8 has 10 subgroups.
        assert_eq!(report.subgroups_scanned, 10);
        let nonbasic: Vec<&SubgroupRecord> = report
            .records
            .iter()
            .filter(|r| r.conclusions.is_some())
            .collect();
        // Abelian normal non-basic: the Klein kernel subgroup, the cyclic
        // C4, the centre... the centre {e, ab} is basic. Expect exactly
        // the order-4 non-basic ones plus the order-2 subgroup <t>? <t>
        // is not normal in D8. The kernel Klein and the C4 qualify, and
        // the whole group is not abelian.
        assert_eq!(nonbasic.len(), 2);
        for r in &nonbasic {
            assert_eq!(r.order, 4);
            let (c1, c2, _c3) = r.conclusions.unwrap();
            assert!(c1 && c2);
            // Exactly one of them (the kernel) satisfies conclusion (3).
        }
        let c3_count = nonbasic
            .iter()
            .filter(|r| r.conclusions.unwrap().2)
            .count();
        assert_eq!(c3_count, 1);
    }

    #[test]
    fn abelian_normal_scan_on_c3_wr_c2_is_vacuous() {
        let w = WreathProduct::new(Group::cyclic(3), Group::cyclic(2));
        let report = classify_abelian_normal(&w, DEFAULT_WREATH_BUDGET).unwrap();
        // Base has exponent 3, so no abelian normal non-basic subgroups.
        assert!(report.records.iter().all(|r| r.conclusions.is_none()));
    }

    #[test]
    fn normalize_identity_endo() {
        let ring = CoeffRing::z_mod(2);
        let c3 = Group::cyclic(3);
        let idm = RingMatrix::identity(ring.clone(), c3.clone(), 1);
        let endo = endo_from_matrix(2, 1, &idm).unwrap();
        let (psi, cert) = normalize_basic_endo(&endo).unwrap();
        assert_eq!(cert.kernel_order_phi, 1);
        assert_eq!(cert.kernel_order_psi, 1);
        assert!(cert.kernels_in_base && cert.base_image_is_base);
        for w in endo.source().enumerate().unwrap() {
            assert_eq!(psi.apply(&w).unwrap(), w);
        }
    }

    #[test]
    fn normalize_strips_top_twist() {
        // endo_from_matrix(2,1,C3,[s]) composed with a top automorphism
        // of C3: ψ strips the twist; kernels match (both trivial).
        let ring = CoeffRing::z_mod(2);
        let c3 = Group::cyclic(3);
        let s = GroupRingElement::term(
            ring.clone(),
            c3.element(Payload::Residue(1)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let shift = endo_from_matrix(2, 1, &RingMatrix::from_element(s)).unwrap();
        // Top automorphism x ↦ 2x of C3 lifted to the wreath.
        let tgt = c3.clone();
        let twist_hom = GroupHom::new(c3.clone(), c3.clone(), move |x| {
            let Payload::Residue(r) = x.payload() else {
                unreachable!()
            };
            tgt.element(Payload::Residue((2 * r) % 3)).unwrap()
        })
        .unwrap();
        let twist = hom_from_top_epi(&twist_hom, shift.source().base()).unwrap();
        let composed = twist.compose(&shift).unwrap();
        let (psi, cert) = normalize_basic_endo(&composed).unwrap();
        assert_eq!(cert.kernel_order_phi, 1);
        assert_eq!(cert.kernel_order_psi, 1);
        // ψ leaves the top coordinate alone.
        for w in composed.source().enumerate().unwrap() {
            assert_eq!(psi.apply(&w).unwrap().top(), w.top());
        }
    }

    #[test]
    fn normalize_base_epi_lift_kernel_in_base() {
        // Φ = hom_from_base_epi(C4→C2) on C4≀C2 is not an endo of one
        // wreath (target differs), so use the doubling endo on C4≀C2:
        // φ: C4→C4, x ↦ x+x is not surjective; use instead the
        // multiply-by-3 automorphism composed check via matrices below.
        // Here: matrix-induced Y=[1+s+s^2... ] keep simple: identity.
        let ring = CoeffRing::z_mod(4);
        let c2 = Group::cyclic(2);
        let two_gre = GroupRingElement::scalar(ring.clone(), c2.clone(), ring.from_int(3)).unwrap();
        let endo = endo_from_matrix(4, 1, &RingMatrix::from_element(two_gre)).unwrap();
        // multiply-by-3 is a unit mod 4: bijective, kernels trivial.
        let (_, cert) = normalize_basic_endo(&endo).unwrap();
        assert_eq!(cert.kernel_order_phi, cert.kernel_order_psi);
        assert!(cert.kernels_in_base);
    }

    #[test]
    fn hopf_pipeline_shift_case() {
        // p=2, parts (1) so P = Z/2, Γ=C3, Y=[s], Z=[s²]: φ̃ bijective.
        let basis = PGroupBasis::new(2, vec![1]);
        let ring = f2();
        let c3 = Group::cyclic(3);
        let mk = |k: u64| {
            RingMatrix::from_element(
                GroupRingElement::term(
                    ring.clone(),
                    c3.element(Payload::Residue(k)).unwrap(),
                    ring.one(),
                )
                .unwrap(),
            )
        };
        let (phi, psi, report) = hopf_witness_pipeline(&basis, 1, &mk(1), &mk(2), None).unwrap();
        assert!(report.phi_after_psi_is_identity);
        assert!(report.v_containment);
        assert_eq!(report.kernel_order, 1);
        assert_eq!(report.bijective, Some(true));
        // ψ is the inverse of φ̃ on the order-24 wreath.
        for w in phi.source().enumerate().unwrap() {
            assert_eq!(phi.apply(&psi.apply(&w).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn hopf_pipeline_identity_z4() {
        // p=2, parts (0,1) so P = Z/4, Γ=C2, Y=Z=[1]: identity pipeline.
        let basis = PGroupBasis::new(2, vec![0, 1]);
        let ring = f2();
        let c2 = Group::cyclic(2);
        let i = RingMatrix::identity(ring.clone(), c2.clone(), 1);
        let (phi, psi, report) = hopf_witness_pipeline(&basis, 1, &i, &i, None).unwrap();
        assert!(report.phi_after_psi_is_identity);
        assert_eq!(report.kernel_order, 1);
        assert_eq!(report.bijective, Some(true));
        for w in phi.source().enumerate().unwrap() {
            assert_eq!(phi.apply(&w).unwrap(), w);
            assert_eq!(psi.apply(&w).unwrap(), w);
        }
    }

    #[test]
    fn hopf_pipeline_mixed_parts() {
        // p=2, parts (1,1): P = Z/2 ⊕ Z/4, Γ=C2, Y = I with upper entry g.
        let basis = PGroupBasis::new(2, vec![1, 1]);
        let ring = f2();
        let c2 = Group::cyclic(2);
        let g = GroupRingElement::term(
            ring.clone(),
            c2.element(Payload::Residue(1)).unwrap(),
            ring.one(),
        )
        .unwrap();
        let one = GroupRingElement::one(ring.clone(), c2.clone());
        let zero = GroupRingElement::zero(ring.clone(), c2.clone());
        let y = RingMatrix::new(
            ring.clone(),
            c2.clone(),
            2,
            vec![one.clone(), g, zero.clone(), one.clone()],
        )
        .unwrap();
        let z = solve_right_inverse(&y, None).unwrap().unwrap();
        let (phi, _psi, report) = hopf_witness_pipeline(&basis, 1, &y, &z, None).unwrap();
        assert!(report.phi_after_psi_is_identity);
        assert!(report.v_containment);
        assert_eq!(report.kernel_order, 1);
        assert_eq!(report.bijective, Some(true));
        assert_eq!(phi.source().order(), Some(128));
    }

    #[test]
    fn hopf_pipeline_windowed_over_z() {
        // Γ = Z with Y = [x]: the shift is invertible, the windowed
        // kernel scan is labelled bounded and finds nothing.
        let basis = PGroupBasis::new(2, vec![1]);
        let ring = f2();
        let z = Group::infinite_cyclic();
        let mono = |k: i64| {
            RingMatrix::from_element(
                GroupRingElement::term(
                    ring.clone(),
                    z.element(Payload::Int(BigInt::from(k))).unwrap(),
                    ring.one(),
                )
                .unwrap(),
            )
        };
        let (phi, _psi, report) =
            hopf_witness_pipeline(&basis, 1, &mono(1), &mono(-1), Some(1)).unwrap();
        assert!(report.bounded);
        assert!(report.phi_after_psi_is_identity);
        assert_eq!(report.kernel_order, 1);
        assert_eq!(report.bijective, None);
        assert!(!phi.source().is_finite());
    }

    #[test]
    fn classify_respects_budget() {
        let w = WreathProduct::new(Group::cyclic(4), Group::cyclic(4));
        assert!(matches!(
            classify_abelian_normal(&w, 256).unwrap_err(),
            Error::BudgetExceeded { .. }
        ));
    }

    #[test]
    fn hopf_pipeline_rejects_bad_inputs() {
        let basis = PGroupBasis::new(2, vec![1]);
        let ring = f2();
        let c3 = Group::cyclic(3);
        let s = RingMatrix::from_element(
            GroupRingElement::term(
                ring.clone(),
                c3.element(Payload::Residue(1)).unwrap(),
                ring.one(),
            )
            .unwrap(),
        );
        // Z = [s] is not a left inverse of Y = [s].
        assert_eq!(
            hopf_witness_pipeline(&basis, 1, &s, &s, None).unwrap_err(),
            Error::NotLeftInverse
        );
    }
}
