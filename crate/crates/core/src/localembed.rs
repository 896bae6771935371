//! Constructive local embeddings of characteristic-p field towers into
//! finite fields and matrix algebras over F_p.
//!
//! A tower starts at F_p and grows by algebraic steps (a monic
//! irreducible modulus over the current stage) and transcendental steps
//! (a fresh variable). Finite subsets of the top stage are carried down
//! stage by stage until they land in some GF(p^k), which then embeds
//! into k×k matrices over F_p by the regular representation: algebraic
//! steps transport the modulus along a base embedding and follow a root
//! into a finite extension, while transcendental steps evaluate at a
//! point avoiding denominator and cross-difference roots. Every
//! constructor runs the universal witness verifier before returning.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::Group;
use crate::matrices::RingMatrix;
use crate::rings::{make_gf, CoeffRing, RingScalar, ScalarRepr};

/// Cap on the closure sets (E, D, E², A, A′); the recipes are followed
/// verbatim, so pathological inputs are rejected rather than truncated.
const CLOSURE_CAP: usize = 20000;

/// Pairwise verification cap for field embeddings (|F| ≤ 256 per the
/// exhaustiveness contract; larger fields are rejected).
const EMBED_VERIFY_CAP: u64 = 256;

// ---------------------------------------------------------------------------
// Tower fields
// ---------------------------------------------------------------------------

/// A stage of a field tower over F_p.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TowerField {
    /// A concrete finite field GF(p^k).
    Base(CoeffRing),
    /// base[x]/(modulus), modulus monic irreducible over the base.
    Algebraic {
        base: Arc<TowerField>,
        modulus: Vec<TowerElem>,
    },
    /// Rational functions base(t).
    RatFun { base: Arc<TowerField> },
}

/// An element of a tower stage in canonical form: base scalars are
/// canonical GF elements; algebraic elements are trimmed coefficient
/// vectors of degree < deg(modulus); rational functions are reduced
/// fractions with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TowerElem {
    Base(RingScalar),
    Poly(Vec<TowerElem>),
    Fraction(Vec<TowerElem>, Vec<TowerElem>),
}

impl TowerField {
    pub fn prime_field(p: u64) -> Result<TowerField> {
        Ok(TowerField::Base(make_gf(p, 1)?))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            TowerField::Base(r) => r.characteristic(),
            TowerField::Algebraic { base, .. } | TowerField::RatFun { base } => {
                base.characteristic()
            }
        }
    }

    /// True when no transcendental step occurs anywhere in the tower.
    pub fn is_finite(&self) -> bool {
        match self {
            TowerField::Base(_) => true,
            TowerField::Algebraic { base, .. } => base.is_finite(),
            TowerField::RatFun { .. } => false,
        }
    }

    pub fn zero(&self) -> TowerElem {
        match self {
            TowerField::Base(r) => TowerElem::Base(r.zero()),
            TowerField::Algebraic { .. } => TowerElem::Poly(vec![]),
            TowerField::RatFun { base } => TowerElem::Fraction(vec![], vec![base.one()]),
        }
    }

    pub fn one(&self) -> TowerElem {
        match self {
            TowerField::Base(r) => TowerElem::Base(r.one()),
            TowerField::Algebraic { base, .. } => TowerElem::Poly(vec![base.one()]),
            TowerField::RatFun { base } => {
                TowerElem::Fraction(vec![base.one()], vec![base.one()])
            }
        }
    }

    pub fn is_zero(&self, a: &TowerElem) -> bool {
        *a == self.zero()
    }

    pub fn add(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        match (self, a, b) {
            (TowerField::Base(_), TowerElem::Base(x), TowerElem::Base(y)) => {
                Ok(TowerElem::Base(x.add(y)?))
            }
            (TowerField::Algebraic { base, .. }, TowerElem::Poly(x), TowerElem::Poly(y)) => {
                Ok(TowerElem::Poly(padd(base, x, y)?))
            }
            (
                TowerField::RatFun { base },
                TowerElem::Fraction(xn, xd),
                TowerElem::Fraction(yn, yd),
            ) => {
                let num = padd(base, &pmul(base, xn, yd)?, &pmul(base, yn, xd)?)?;
                let den = pmul(base, xd, yd)?;
                fraction_canon(base, num, den)
            }
            _ => Err(Error::Mismatch),
        }
    }

    pub fn neg(&self, a: &TowerElem) -> Result<TowerElem> {
        match (self, a) {
            (TowerField::Base(_), TowerElem::Base(x)) => Ok(TowerElem::Base(x.neg())),
            (TowerField::Algebraic { base, .. }, TowerElem::Poly(x)) => {
                Ok(TowerElem::Poly(pneg(base, x)?))
            }
            (TowerField::RatFun { base }, TowerElem::Fraction(n, d)) => {
                Ok(TowerElem::Fraction(pneg(base, n)?, d.clone()))
            }
            _ => Err(Error::Mismatch),
        }
    }

    pub fn sub(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub fn mul(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        match (self, a, b) {
            (TowerField::Base(_), TowerElem::Base(x), TowerElem::Base(y)) => {
                Ok(TowerElem::Base(x.mul(y)?))
            }
            (
                TowerField::Algebraic { base, modulus },
                TowerElem::Poly(x),
                TowerElem::Poly(y),
            ) => {
                let prod = pmul(base, x, y)?;
                Ok(TowerElem::Poly(prem_monic(base, &prod, modulus)?))
            }
            (
                TowerField::RatFun { base },
                TowerElem::Fraction(xn, xd),
                TowerElem::Fraction(yn, yd),
            ) => {
                let num = pmul(base, xn, yn)?;
                let den = pmul(base, xd, yd)?;
                fraction_canon(base, num, den)
            }
            _ => Err(Error::Mismatch),
        }
    }

    pub fn inv(&self, a: &TowerElem) -> Result<TowerElem> {
        if self.is_zero(a) {
            return Err(Error::NotAUnit);
        }
        match (self, a) {
            (TowerField::Base(_), TowerElem::Base(x)) => Ok(TowerElem::Base(x.inv()?)),
            (TowerField::Algebraic { base, modulus }, TowerElem::Poly(x)) => {
                // Extended Euclid in base[x] against the modulus.
                let mut r0 = modulus.clone();
                let mut r1 = x.clone();
                let mut t0: Vec<TowerElem> = vec![];
                let mut t1 = vec![base.one()];
                while !r1.is_empty() {
                    let (q, r) = pdivmod(base, &r0, &r1)?;
                    let t = psub(base, &t0, &pmul(base, &q, &t1)?)?;
                    r0 = r1;
                    r1 = r;
                    t0 = t1;
                    t1 = t;
                }
                if r0.len() != 1 {
                    return Err(Error::NotAUnit);
                }
                let scale = base.inv(&r0[0])?;
                let inv: Vec<TowerElem> = t0
                    .iter()
                    .map(|c| base.mul(c, &scale))
                    .collect::<Result<_>>()?;
                Ok(TowerElem::Poly(ptrim(base, inv)))
            }
            (TowerField::RatFun { base }, TowerElem::Fraction(n, d)) => {
                fraction_canon(base, d.clone(), n.clone())
            }
            _ => Err(Error::Mismatch),
        }
    }

    /// The image of an integer under Z → F.
    pub fn from_int(&self, n: i64) -> TowerElem {
        match self {
            TowerField::Base(r) => TowerElem::Base(r.from_int(n)),
            TowerField::Algebraic { base, .. } => {
                let c = base.from_int(n);
                if base.is_zero(&c) {
                    TowerElem::Poly(vec![])
                } else {
                    TowerElem::Poly(vec![c])
                }
            }
            TowerField::RatFun { base } => {
                let c = base.from_int(n);
                if base.is_zero(&c) {
                    self.zero()
                } else {
                    TowerElem::Fraction(vec![c], vec![base.one()])
                }
            }
        }
    }

    /// Canonical element from raw polynomial coefficients over the base
    /// (algebraic stages reduce mod the modulus).
    pub fn poly_elem(&self, coeffs: Vec<TowerElem>) -> Result<TowerElem> {
        let TowerField::Algebraic { base, modulus } = self else {
            return Err(Error::Mismatch);
        };
        Ok(TowerElem::Poly(prem_monic(
            base,
            &ptrim(base, coeffs),
            modulus,
        )?))
    }

    /// Canonical fraction from raw numerator/denominator coefficients.
    pub fn fraction_elem(
        &self,
        num: Vec<TowerElem>,
        den: Vec<TowerElem>,
    ) -> Result<TowerElem> {
        let TowerField::RatFun { base } = self else {
            return Err(Error::Mismatch);
        };
        fraction_canon(base, ptrim(base, num), ptrim(base, den))
    }

    /// All elements of a finite stage, deterministic order.
    pub fn enumerate(&self) -> Result<Vec<TowerElem>> {
        match self {
            TowerField::Base(r) => Ok(r.enumerate()?.into_iter().map(TowerElem::Base).collect()),
            TowerField::Algebraic { base, modulus } => {
                let degree = modulus.len() - 1;
                let base_elems = base.enumerate()?;
                let mut out = Vec::new();
                let mut idx = vec![0usize; degree];
                loop {
                    let coeffs: Vec<TowerElem> =
                        idx.iter().map(|&i| base_elems[i].clone()).collect();
                    out.push(TowerElem::Poly(ptrim(base, coeffs)));
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
            TowerField::RatFun { .. } => Err(Error::Unsupported(
                "enumeration of a transcendental stage".into(),
            )),
        }
    }
}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerElem::Base(s) => write!(f, "{s}"),
            TowerElem::Poly(cs) => {
                if cs.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> = cs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("({c})y"),
                        _ => format!("({c})y^{i}"),
                    })
                    .collect();
                write!(f, "{}", parts.join("+"))
            }
            TowerElem::Fraction(n, d) => {
                let fmt_poly = |v: &[TowerElem]| -> String {
                    if v.is_empty() {
                        return "0".into();
                    }
                    v.iter()
                        .enumerate()
                        .map(|(i, c)| match i {
                            0 => format!("{c}"),
                            1 => format!("({c})t"),
                            _ => format!("({c})t^{i}"),
                        })
                        .collect::<Vec<_>>()
                        .join("+")
                };
                write!(f, "({})/({})", fmt_poly(n), fmt_poly(d))
            }
        }
    }
}

// Polynomials over a tower stage: coefficient vectors, ascending, trimmed.

fn ptrim(base: &TowerField, mut v: Vec<TowerElem>) -> Vec<TowerElem> {
    while v.last().map(|c| base.is_zero(c)) == Some(true) {
        v.pop();
    }
    v
}

fn padd(base: &TowerField, a: &[TowerElem], b: &[TowerElem]) -> Result<Vec<TowerElem>> {
    let n = a.len().max(b.len());
    let zero = base.zero();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(base.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))?);
    }
    Ok(ptrim(base, out))
}

fn psub(base: &TowerField, a: &[TowerElem], b: &[TowerElem]) -> Result<Vec<TowerElem>> {
    let nb: Vec<TowerElem> = b.iter().map(|c| base.neg(c)).collect::<Result<_>>()?;
    padd(base, a, &nb)
}

fn pneg(base: &TowerField, a: &[TowerElem]) -> Result<Vec<TowerElem>> {
    a.iter().map(|c| base.neg(c)).collect()
}

fn pmul(base: &TowerField, a: &[TowerElem], b: &[TowerElem]) -> Result<Vec<TowerElem>> {
    if a.is_empty() || b.is_empty() {
        return Ok(vec![]);
    }
    let mut out = vec![base.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = base.mul(x, y)?;
            out[i + j] = base.add(&out[i + j], &t)?;
        }
    }
    Ok(ptrim(base, out))
}

fn pdivmod(
    base: &TowerField,
    a: &[TowerElem],
    b: &[TowerElem],
) -> Result<(Vec<TowerElem>, Vec<TowerElem>)> {
    let b = ptrim(base, b.to_vec());
    if b.is_empty() {
        return Err(Error::NotAUnit);
    }
    let lead_inv = base.inv(b.last().unwrap())?;
    let mut r = ptrim(base, a.to_vec());
    let db = b.len() - 1;
    let mut q = vec![base.zero(); r.len().saturating_sub(db)];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let coeff = base.mul(r.last().unwrap(), &lead_inv)?;
        q[shift] = coeff.clone();
        for (i, c) in b.iter().enumerate() {
            let t = base.mul(&coeff, c)?;
            r[i + shift] = base.sub(&r[i + shift], &t)?;
        }
        r = ptrim(base, r);
    }
    Ok((ptrim(base, q), r))
}

fn prem_monic(
    base: &TowerField,
    a: &[TowerElem],
    modulus: &[TowerElem],
) -> Result<Vec<TowerElem>> {
    let (_, r) = pdivmod(base, a, modulus)?;
    Ok(r)
}

fn pgcd(base: &TowerField, a: &[TowerElem], b: &[TowerElem]) -> Result<Vec<TowerElem>> {
    let mut r0 = ptrim(base, a.to_vec());
    let mut r1 = ptrim(base, b.to_vec());
    while !r1.is_empty() {
        let (_, r) = pdivmod(base, &r0, &r1)?;
        r0 = r1;
        r1 = r;
    }
    Ok(r0)
}

fn fraction_canon(
    base: &TowerField,
    num: Vec<TowerElem>,
    den: Vec<TowerElem>,
) -> Result<TowerElem> {
    let num = ptrim(base, num);
    let den = ptrim(base, den);
    if den.is_empty() {
        return Err(Error::NotAUnit);
    }
    if num.is_empty() {
        return Ok(TowerElem::Fraction(vec![], vec![base.one()]));
    }
    let g = pgcd(base, &num, &den)?;
    let (num, _) = pdivmod(base, &num, &g)?;
    let (den, _) = pdivmod(base, &den, &g)?;
    let lead_inv = base.inv(den.last().unwrap())?;
    let num: Vec<TowerElem> = num
        .iter()
        .map(|c| base.mul(c, &lead_inv))
        .collect::<Result<_>>()?;
    let den: Vec<TowerElem> = den
        .iter()
        .map(|c| base.mul(c, &lead_inv))
        .collect::<Result<_>>()?;
    Ok(TowerElem::Fraction(ptrim(base, num), den))
}

/// Converts a rational-function scalar from the rings module into the
/// tower form over RatFun(Base(gf)).
pub fn tower_from_ratfun_scalar(s: &RingScalar) -> Result<(TowerField, TowerElem)> {
    let CoeffRing::RatFun(gf) = &s.ring else {
        return Err(Error::RingMismatch("expected a rat_fun scalar".into()));
    };
    let base_ring = CoeffRing::Gf(gf.clone());
    let base = Arc::new(TowerField::Base(base_ring.clone()));
    let field = TowerField::RatFun { base };
    let ScalarRepr::Fraction(num, den) = &s.repr else {
        unreachable!()
    };
    let conv = |v: &Vec<Vec<u64>>| -> Vec<TowerElem> {
        v.iter()
            .map(|c| {
                TowerElem::Base(base_ring.gf_element(c.clone()).expect("canonical"))
            })
            .collect()
    };
    Ok((field, TowerElem::Fraction(conv(num), conv(den))))
}

// ---------------------------------------------------------------------------
// Tower construction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum FieldTowerStep {
    /// Monic irreducible modulus over the current stage (coefficients are
    /// elements of the stage being extended).
    Algebraic(Vec<TowerElem>),
    Transcendental,
}

/// Grows a tower over F_p, validating each algebraic modulus: monic, and
/// irreducible over the current stage (exhaustive trial division for
/// finite stages; for transcendental stages the coefficients must be
/// constants of the finite prefix, where irreducibility over the prefix
/// is exhaustive and transfers to the rational-function stage).
pub fn build_tower(p: u64, steps: &[FieldTowerStep]) -> Result<TowerField> {
    let mut field = TowerField::prime_field(p)?;
    for step in steps {
        field = match step {
            FieldTowerStep::Transcendental => TowerField::RatFun {
                base: Arc::new(field),
            },
            FieldTowerStep::Algebraic(modulus) => {
                let modulus = ptrim(&field, modulus.clone());
                if modulus.len() < 2 {
                    return Err(Error::NotIrreducible);
                }
                if *modulus.last().unwrap() != field.one() {
                    return Err(Error::Unsupported("modulus must be monic".into()));
                }
                if !is_irreducible_over(&field, &modulus)? {
                    return Err(Error::NotIrreducible);
                }
                TowerField::Algebraic {
                    base: Arc::new(field),
                    modulus,
                }
            }
        };
    }
    Ok(field)
}

fn is_irreducible_over(field: &TowerField, modulus: &[TowerElem]) -> Result<bool> {
    if field.is_finite() {
        let degree = modulus.len() - 1;
        if degree == 1 {
            return Ok(true);
        }
        let elems = field.enumerate()?;
        for d in 1..=degree / 2 {
            let mut idx = vec![0usize; d];
            loop {
                let mut g: Vec<TowerElem> = idx.iter().map(|&i| elems[i].clone()).collect();
                g.push(field.one());
                let (_, r) = pdivmod(field, modulus, &g)?;
                if r.is_empty() {
                    return Ok(false);
                }
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] < elems.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        return Ok(true);
    }
    // Transcendental stage: require constant coefficients, descending to
    // the finite prefix; irreducibility over the prefix transfers to the
    // rational-function field (a factorization would have to be constant
    // in the transcendental variable).
    let TowerField::RatFun { base } = field else {
        return Err(Error::Unsupported(
            "algebraic step over a nested transcendental stage needs constant coefficients".into(),
        ));
    };
    if !base.is_finite() {
        return Err(Error::Unsupported(
            "algebraic step over doubly-transcendental stages".into(),
        ));
    }
    let constants: Option<Vec<TowerElem>> = modulus
        .iter()
        .map(|c| match c {
            TowerElem::Fraction(n, d) if d.len() == 1 && *d == vec![base.one()] => match n.len() {
                0 => Some(base.zero()),
                1 => Some(n[0].clone()),
                _ => None,
            },
            _ => None,
        })
        .collect();
    let Some(constants) = constants else {
        return Err(Error::Unsupported(
            "algebraic step over a transcendental stage needs constant coefficients".into(),
        ));
    };
    is_irreducible_over(base, &ptrim(base, constants))
}

// ---------------------------------------------------------------------------
// GF embeddings and roots
// ---------------------------------------------------------------------------

/// Embedding GF(p^k) ↪ GF(p^K) for k | K, sending the generator to the
/// lexicographically first root of the small modulus in the big field.
#[derive(Debug, Clone)]
pub struct GfEmbedding {
    pub from: CoeffRing,
    pub to: CoeffRing,
    root: RingScalar,
}

impl GfEmbedding {
    pub fn new(from: &CoeffRing, to: &CoeffRing) -> Result<GfEmbedding> {
        let (CoeffRing::Gf(f), CoeffRing::Gf(t)) = (from, to) else {
            return Err(Error::RingMismatch("gf embedding needs gf fields".into()));
        };
        if f.p != t.p || t.k % f.k != 0 {
            return Err(Error::RingMismatch(
                "no embedding between these fields".into(),
            ));
        }
        // Modulus of `from` as a polynomial over `to` (prime subfield coeffs).
        let modulus: Vec<RingScalar> = f.modulus.iter().map(|&c| to.from_int(c as i64)).collect();
        let root = gf_roots(to, &modulus)?
            .into_iter()
            .next()
            .expect("a subfield root exists whenever k divides K");
        let emb = GfEmbedding {
            from: from.clone(),
            to: to.clone(),
            root,
        };
        // Verify the ring-homomorphism law on all pairs (|from| <= 256).
        if f.p.pow(f.k as u32) <= EMBED_VERIFY_CAP {
            let elems = from.enumerate()?;
            for a in &elems {
                for b in &elems {
                    let add_ok =
                        emb.apply(&a.add(b)?)? == emb.apply(a)?.add(&emb.apply(b)?)?;
                    let mul_ok =
                        emb.apply(&a.mul(b)?)? == emb.apply(a)?.mul(&emb.apply(b)?)?;
                    if !add_ok || !mul_ok {
                        return Err(Error::Unsupported(
                            "internal: subfield embedding failed verification".into(),
                        ));
                    }
                }
            }
        }
        Ok(emb)
    }

    pub fn apply(&self, a: &RingScalar) -> Result<RingScalar> {
        if a.ring != self.from {
            return Err(Error::RingMismatch("wrong source field".into()));
        }
        let ScalarRepr::Poly(coeffs) = &a.repr else {
            unreachable!()
        };
        let mut acc = self.to.zero();
        let mut power = self.to.one();
        for &c in coeffs {
            let term = self.to.from_int(c as i64).mul(&power)?;
            acc = acc.add(&term)?;
            power = power.mul(&self.root)?;
        }
        Ok(acc)
    }
}

/// All roots of a polynomial (coefficients in a gf field) by scanning
/// the field in canonical order.
pub fn gf_roots(field: &CoeffRing, poly: &[RingScalar]) -> Result<Vec<RingScalar>> {
    let mut out = Vec::new();
    for alpha in field.enumerate()? {
        let mut acc = field.zero();
        let mut power = field.one();
        for c in poly {
            acc = acc.add(&c.mul(&power)?)?;
            power = power.mul(&alpha)?;
        }
        if acc.is_zero() {
            out.push(alpha);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Witnesses
// ---------------------------------------------------------------------------

/// The codomain of a witness: a finite field or a matrix algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetElem {
    Scalar(RingScalar),
    Matrix(RingMatrix),
}

impl TargetElem {
    fn add(&self, other: &TargetElem) -> Result<TargetElem> {
        match (self, other) {
            (TargetElem::Scalar(a), TargetElem::Scalar(b)) => Ok(TargetElem::Scalar(a.add(b)?)),
            (TargetElem::Matrix(a), TargetElem::Matrix(b)) => Ok(TargetElem::Matrix(a.add(b)?)),
            _ => Err(Error::Mismatch),
        }
    }

    fn mul(&self, other: &TargetElem) -> Result<TargetElem> {
        match (self, other) {
            (TargetElem::Scalar(a), TargetElem::Scalar(b)) => Ok(TargetElem::Scalar(a.mul(b)?)),
            (TargetElem::Matrix(a), TargetElem::Matrix(b)) => Ok(TargetElem::Matrix(a.mul(b)?)),
            _ => Err(Error::Mismatch),
        }
    }

    fn is_one(&self) -> bool {
        match self {
            TargetElem::Scalar(a) => a.is_one(),
            TargetElem::Matrix(a) => a.is_identity(),
        }
    }
}

impl fmt::Display for TargetElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetElem::Scalar(a) => write!(f, "{a}"),
            TargetElem::Matrix(a) => write!(f, "{a}"),
        }
    }
}

/// A finite-domain map that behaves like an injective ring homomorphism
/// on its domain: sums and products that stay inside the domain are
/// preserved, and the identity maps to the identity when present.
#[derive(Debug, Clone)]
pub struct LocalEmbeddingWitness {
    pub source: TowerField,
    pub domain: Vec<TowerElem>,
    pub mapping: Vec<TargetElem>,
    /// Triples (i, j, k) with domain[i] + domain[j] = domain[k] that
    /// were exercised by the verifier.
    pub checked_sums: Vec<(usize, usize, usize)>,
    pub checked_products: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutcome {
    Verified,
    Violation(String),
}

/// Checks conditions (1)–(3) on every pair whose sum/product lies in the
/// domain, plus identity preservation; records the exercised triples.
pub fn verify_local_embedding(w: &mut LocalEmbeddingWitness) -> Result<VerifyOutcome> {
    w.checked_sums.clear();
    w.checked_products.clear();
    let field = &w.source;
    let index: std::collections::BTreeMap<&TowerElem, usize> = w
        .domain
        .iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let index_of = |e: &TowerElem| index.get(e).copied();
    // Injectivity.
    for i in 0..w.domain.len() {
        for j in i + 1..w.domain.len() {
            if w.mapping[i] == w.mapping[j] {
                return Ok(VerifyOutcome::Violation(format!(
                    "not injective: {} and {} share the image {}",
                    w.domain[i], w.domain[j], w.mapping[i]
                )));
            }
        }
    }
    // Identity preservation.
    if let Some(i) = index_of(&field.one()) {
        if !w.mapping[i].is_one() {
            return Ok(VerifyOutcome::Violation(format!(
                "identity maps to {}",
                w.mapping[i]
            )));
        }
    }
    for i in 0..w.domain.len() {
        for j in 0..w.domain.len() {
            let sum = field.add(&w.domain[i], &w.domain[j])?;
            if let Some(k) = index_of(&sum) {
                let lhs = w.mapping[i].add(&w.mapping[j])?;
                if lhs != w.mapping[k] {
                    return Ok(VerifyOutcome::Violation(format!(
                        "f({}) + f({}) != f({})",
                        w.domain[i], w.domain[j], sum
                    )));
                }
                w.checked_sums.push((i, j, k));
            }
            let prod = field.mul(&w.domain[i], &w.domain[j])?;
            if let Some(k) = index_of(&prod) {
                let lhs = w.mapping[i].mul(&w.mapping[j])?;
                if lhs != w.mapping[k] {
                    return Ok(VerifyOutcome::Violation(format!(
                        "f({}) * f({}) != f({})",
                        w.domain[i], w.domain[j], prod
                    )));
                }
                w.checked_products.push((i, j, k));
            }
        }
    }
    Ok(VerifyOutcome::Verified)
}

fn expect_verified(mut w: LocalEmbeddingWitness) -> Result<LocalEmbeddingWitness> {
    match verify_local_embedding(&mut w)? {
        VerifyOutcome::Verified => Ok(w),
        VerifyOutcome::Violation(v) => Err(Error::Unsupported(format!(
            "internal: constructed witness failed verification: {v}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Regular representation GF(p^k) -> M_k(F_p)
// ---------------------------------------------------------------------------

/// The regular representation of GF(p^k) on the power basis
/// {1, x, …, x^{k-1}}: row i of the image of a is x^i·a in coordinates.
#[derive(Debug, Clone)]
pub struct GfMatrixEmbedding {
    pub field: CoeffRing,
    pub p: u64,
    pub k: usize,
}

impl GfMatrixEmbedding {
    pub fn apply(&self, a: &RingScalar) -> Result<RingMatrix> {
        if a.ring != self.field {
            return Err(Error::RingMismatch("wrong source field".into()));
        }
        let prime = make_gf(self.p, 1)?;
        let mut scalars = Vec::with_capacity(self.k * self.k);
        let mut row = a.clone();
        let x = self.field.gf_element(vec![0, 1])?;
        for _ in 0..self.k {
            let ScalarRepr::Poly(coeffs) = &row.repr else {
                unreachable!()
            };
            for j in 0..self.k {
                let c = coeffs.get(j).copied().unwrap_or(0);
                scalars.push(prime.from_int(c as i64));
            }
            row = row.mul(&x)?;
        }
        RingMatrix::from_scalars(prime, self.k, scalars)
    }
}

/// Verified ring embedding of a finite field into k×k matrices over F_p;
/// additive and multiplicative on all pairs (|F| ≤ 256).
pub fn embed_gf_into_matrices(field: &CoeffRing) -> Result<(GfMatrixEmbedding, LocalEmbeddingWitness)> {
    let CoeffRing::Gf(gf) = field else {
        return Err(Error::RingMismatch("expected a gf field".into()));
    };
    if gf.p.pow(gf.k as u32) > EMBED_VERIFY_CAP {
        return Err(Error::BudgetExceeded {
            needed: gf.p.pow(gf.k as u32),
            budget: EMBED_VERIFY_CAP,
        });
    }
    let emb = GfMatrixEmbedding {
        field: field.clone(),
        p: gf.p,
        k: gf.k,
    };
    let domain: Vec<TowerElem> = field.enumerate()?.into_iter().map(TowerElem::Base).collect();
    let mapping = field
        .enumerate()?
        .iter()
        .map(|a| Ok(TargetElem::Matrix(emb.apply(a)?)))
        .collect::<Result<Vec<_>>>()?;
    let witness = expect_verified(LocalEmbeddingWitness {
        source: TowerField::Base(field.clone()),
        domain,
        mapping,
        checked_sums: vec![],
        checked_products: vec![],
    })?;
    Ok((emb, witness))
}

// ---------------------------------------------------------------------------
// Evaluation embeddings (transcendental case)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EvalData {
    /// The evaluation point.
    pub alpha: RingScalar,
    /// The field containing it (possibly an extension of the input field).
    pub field: CoeffRing,
    /// How many times the field was extended before a point was found.
    pub extensions: u32,
}

/// Evaluation local embedding of a finite set of rational functions over
/// a gf field K: scans K in canonical order for a point α avoiding all
/// denominator roots and all roots of the cross-differences p·s − q·r,
/// extending K to GF(p, 2k) (repeatedly) when the scan exhausts the
/// field. Injectivity is exact: f(x) = f(y) iff α is a cross-difference
/// root.
pub fn local_embed_eval(
    fractions: &[RingScalar],
) -> Result<(LocalEmbeddingWitness, EvalData)> {
    if fractions.is_empty() {
        return Err(Error::Unsupported("empty domain".into()));
    }
    let CoeffRing::RatFun(gf) = &fractions[0].ring else {
        return Err(Error::RingMismatch("expected rat_fun scalars".into()));
    };
    let base_field = CoeffRing::Gf(gf.clone());
    let source = TowerField::RatFun {
        base: Arc::new(TowerField::Base(base_field.clone())),
    };
    // Collect (num, den) pairs as polynomials with gf-scalar coefficients.
    let mut pairs: Vec<(Vec<RingScalar>, Vec<RingScalar>)> = Vec::new();
    let mut domain = Vec::new();
    for s in fractions {
        if s.ring != fractions[0].ring {
            return Err(Error::RingMismatch("mixed rings in domain".into()));
        }
        let ScalarRepr::Fraction(num, den) = &s.repr else {
            unreachable!()
        };
        let conv = |v: &Vec<Vec<u64>>| -> Result<Vec<RingScalar>> {
            v.iter().map(|c| base_field.gf_element(c.clone())).collect()
        };
        pairs.push((conv(num)?, conv(den)?));
        let (_, elem) = tower_from_ratfun_scalar(s)?;
        domain.push(elem);
    }
    // Forbidden polynomials: denominators and cross-differences.
    let mut forbidden: Vec<Vec<RingScalar>> = pairs.iter().map(|(_, d)| d.clone()).collect();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (pn, pd) = &pairs[i];
            let (rn, rd) = &pairs[j];
            let cross = scalar_poly_sub(
                &base_field,
                &scalar_poly_mul(&base_field, pn, rd)?,
                &scalar_poly_mul(&base_field, rn, pd)?,
            )?;
            // Zero cross-difference would mean equal domain elements.
            if !cross.is_empty() {
                forbidden.push(cross);
            }
        }
    }
    // Scan, extending the field as needed.
    let mut field = base_field.clone();
    let mut lifted = pairs.clone();
    let mut lifted_forbidden = forbidden.clone();
    let mut extensions = 0u32;
    loop {
        let candidate = field.enumerate()?.into_iter().find(|alpha| {
            lifted_forbidden
                .iter()
                .all(|poly| !scalar_poly_eval(&field, poly, alpha).map(|v| v.is_zero()).unwrap_or(true))
        });
        if let Some(alpha) = candidate {
            let mapping = lifted
                .iter()
                .map(|(n, d)| {
                    let nv = scalar_poly_eval(&field, n, &alpha)?;
                    let dv = scalar_poly_eval(&field, d, &alpha)?;
                    Ok(TargetElem::Scalar(nv.mul(&dv.inv()?)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let witness = expect_verified(LocalEmbeddingWitness {
                source,
                domain,
                mapping,
                checked_sums: vec![],
                checked_products: vec![],
            })?;
            return Ok((
                witness,
                EvalData {
                    alpha,
                    field,
                    extensions,
                },
            ));
        }
        // Exhausted: double the extension degree and lift everything.
        extensions += 1;
        if extensions > 8 {
            return Err(Error::Unsupported(
                "internal: evaluation point not found within 8 extensions".into(),
            ));
        }
        let CoeffRing::Gf(cur) = &field else { unreachable!() };
        let bigger = make_gf(cur.p, cur.k * 2)?;
        let emb = GfEmbedding::new(&field, &bigger)?;
        let lift_poly = |poly: &Vec<RingScalar>| -> Result<Vec<RingScalar>> {
            poly.iter().map(|c| emb.apply(c)).collect()
        };
        lifted = lifted
            .iter()
            .map(|(n, d)| Ok((lift_poly(n)?, lift_poly(d)?)))
            .collect::<Result<Vec<_>>>()?;
        lifted_forbidden = lifted_forbidden
            .iter()
            .map(lift_poly)
            .collect::<Result<Vec<_>>>()?;
        field = bigger;
    }
}

fn scalar_poly_mul(
    field: &CoeffRing,
    a: &[RingScalar],
    b: &[RingScalar],
) -> Result<Vec<RingScalar>> {
    if a.is_empty() || b.is_empty() {
        return Ok(vec![]);
    }
    let mut out = vec![field.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = x.mul(y)?;
            out[i + j] = out[i + j].add(&t)?;
        }
    }
    while out.last().map(|c| c.is_zero()) == Some(true) {
        out.pop();
    }
    Ok(out)
}

fn scalar_poly_sub(
    field: &CoeffRing,
    a: &[RingScalar],
    b: &[RingScalar],
) -> Result<Vec<RingScalar>> {
    let n = a.len().max(b.len());
    let zero = field.zero();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(a.get(i).unwrap_or(&zero).sub(b.get(i).unwrap_or(&zero))?);
    }
    while out.last().map(|c| c.is_zero()) == Some(true) {
        out.pop();
    }
    Ok(out)
}

fn scalar_poly_eval(
    field: &CoeffRing,
    poly: &[RingScalar],
    x: &RingScalar,
) -> Result<RingScalar> {
    let mut acc = field.zero();
    for c in poly.iter().rev() {
        acc = acc.mul(x)?.add(c)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Stage embeddings (the AlgLE / TranscLE recursions)
// ---------------------------------------------------------------------------

/// A local embedding of domain elements of a tower stage into a gf field.
#[derive(Debug, Clone)]
pub struct StageEmbedding {
    pub codomain: CoeffRing,
    map: std::collections::BTreeMap<TowerElem, RingScalar>,
    /// Evaluation data of the topmost transcendental step, when any.
    pub eval: Option<EvalData>,
}

impl StageEmbedding {
    pub fn lookup(&self, e: &TowerElem) -> Result<RingScalar> {
        self.map
            .get(e)
            .cloned()
            .ok_or_else(|| Error::BaseEmbeddingUnavailable(format!("{e} not in stage domain")))
    }
}

/// Recursively constructs a local embedding of `domain` ⊂ `field` into
/// some GF(p^k): identity for base stages, the coefficient-transport
/// plus root-following construction for algebraic stages, and the
/// closure-set bookkeeping plus evaluation for transcendental stages.
pub fn local_embed_stage(field: &TowerField, domain: &[TowerElem]) -> Result<StageEmbedding> {
    match field {
        TowerField::Base(ring) => {
            let map = domain
                .iter()
                .map(|e| match e {
                    TowerElem::Base(s) => Ok((e.clone(), s.clone())),
                    _ => Err(Error::Mismatch),
                })
                .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
            Ok(StageEmbedding {
                codomain: ring.clone(),
                map,
                eval: None,
            })
        }
        TowerField::Algebraic { base, modulus } => {
            stage_algebraic(base, modulus, domain)
        }
        TowerField::RatFun { base } => stage_transcendental(base, domain),
    }
}

/// Algebraic step: assemble E (closed under negation; contains 0, 1, all
/// domain coefficients and the coefficients of t^n..t^{2n-2}), take D =
/// (2n-1)-fold sums over E·E·E, embed D via the base stage, transport
/// the modulus, and follow a root into successive extensions.
fn stage_algebraic(
    base: &TowerField,
    modulus: &[TowerElem],
    domain: &[TowerElem],
) -> Result<StageEmbedding> {
    let n = modulus.len() - 1;
    let cap_check = |set: &BTreeSet<TowerElem>| -> Result<()> {
        if set.len() > CLOSURE_CAP {
            return Err(Error::BudgetExceeded {
                needed: set.len() as u64,
                budget: CLOSURE_CAP as u64,
            });
        }
        Ok(())
    };
    let mut e_set: BTreeSet<TowerElem> = BTreeSet::new();
    e_set.insert(base.zero());
    e_set.insert(base.one());
    for x in domain {
        let TowerElem::Poly(coeffs) = x else {
            return Err(Error::Mismatch);
        };
        e_set.extend(coeffs.iter().cloned());
    }
    // Coefficients of t^n .. t^{2n-2} reduced mod the modulus.
    let mut power = vec![base.zero(); n];
    power.push(base.one()); // t^n before reduction
    let mut reduced = prem_monic(base, &power, modulus)?;
    for _ in n..=(2 * n - 2).max(n) {
        e_set.extend(reduced.iter().cloned());
        let mut shifted = vec![base.zero()];
        shifted.extend(reduced.iter().cloned());
        reduced = prem_monic(base, &shifted, modulus)?;
    }
    // Close under negation.
    for x in e_set.clone() {
        e_set.insert(base.neg(&x)?);
    }
    cap_check(&e_set)?;
    // E·E·E, then (2n-1)-fold sums.
    let mut eee: BTreeSet<TowerElem> = BTreeSet::new();
    for a in &e_set {
        for b in &e_set {
            let ab = base.mul(a, b)?;
            for c in &e_set {
                eee.insert(base.mul(&ab, c)?);
            }
            cap_check(&eee)?;
        }
    }
    let mut d_set = eee.clone();
    for _ in 1..(2 * n - 1) {
        let snapshot: Vec<TowerElem> = d_set.iter().cloned().collect();
        for x in &snapshot {
            for y in &eee {
                d_set.insert(base.add(x, y)?);
            }
            cap_check(&d_set)?;
        }
    }
    let d_elems: Vec<TowerElem> = d_set.into_iter().collect();
    let base_emb = local_embed_stage(base, &d_elems)?;
    // Transport the modulus and find a root t' in an extension.
    let modulus_img: Vec<RingScalar> = modulus
        .iter()
        .map(|c| base_emb.lookup(c))
        .collect::<Result<_>>()?;
    let CoeffRing::Gf(k0) = &base_emb.codomain else {
        unreachable!()
    };
    let mut chosen: Option<(CoeffRing, GfEmbedding, RingScalar)> = None;
    for j in 1..=n {
        let ext = make_gf(k0.p, k0.k * j)?;
        let emb = GfEmbedding::new(&base_emb.codomain, &ext)?;
        let lifted: Vec<RingScalar> = modulus_img
            .iter()
            .map(|c| emb.apply(c))
            .collect::<Result<_>>()?;
        if let Some(root) = gf_roots(&ext, &lifted)?.into_iter().next() {
            chosen = Some((ext, emb, root));
            break;
        }
    }
    let (codomain, iota, t_prime) =
        chosen.expect("a root exists within the degree bound");
    // f'(a_0 + a_1 t + ... ) = f(a_0) + f(a_1) t' + ...
    let map = domain
        .iter()
        .map(|x| {
            let TowerElem::Poly(coeffs) = x else {
                unreachable!()
            };
            let mut acc = codomain.zero();
            let mut power = codomain.one();
            for c in coeffs {
                let fc = iota.apply(&base_emb.lookup(c)?)?;
                acc = acc.add(&fc.mul(&power)?)?;
                power = power.mul(&t_prime)?;
            }
            Ok((x.clone(), acc))
        })
        .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
    Ok(StageEmbedding {
        codomain,
        map,
        eval: None,
    })
}

/// Transcendental step: E = numerators ∪ denominators ∪ {0, 1};
/// E² = {p·s + q·r}; A = all coefficients; A′ = (2d+2)-fold sums of
/// products; embed A′ via the base stage, push the fractions
/// coefficientwise, and evaluate.
fn stage_transcendental(base: &TowerField, domain: &[TowerElem]) -> Result<StageEmbedding> {
    let mut e_polys: Vec<Vec<TowerElem>> = vec![vec![], vec![base.one()]];
    for x in domain {
        let TowerElem::Fraction(n, d) = x else {
            return Err(Error::Mismatch);
        };
        if !e_polys.contains(n) {
            e_polys.push(n.clone());
        }
        if !e_polys.contains(d) {
            e_polys.push(d.clone());
        }
    }
    // E² = {p·s + q·r : p, q, r, s ∈ E}.
    let mut e2: BTreeSet<Vec<TowerElem>> = BTreeSet::new();
    for p in &e_polys {
        for s in &e_polys {
            let ps = pmul(base, p, s)?;
            for q in &e_polys {
                for r in &e_polys {
                    let qr = pmul(base, q, r)?;
                    e2.insert(padd(base, &ps, &qr)?);
                }
            }
            if e2.len() > CLOSURE_CAP {
                return Err(Error::BudgetExceeded {
                    needed: e2.len() as u64,
                    budget: CLOSURE_CAP as u64,
                });
            }
        }
    }
    let dmax = e2.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0);
    // A: all coefficients (plus 0, 1).
    let mut a_elems: BTreeSet<TowerElem> = BTreeSet::new();
    a_elems.insert(base.zero());
    a_elems.insert(base.one());
    for p in &e2 {
        a_elems.extend(p.iter().cloned());
    }
    // A' = sums of (2d+2) products of pairs from A.
    let mut products: BTreeSet<TowerElem> = BTreeSet::new();
    for x in &a_elems {
        for y in &a_elems {
            products.insert(base.mul(x, y)?);
        }
    }
    let mut a_prime = products.clone();
    for _ in 1..(2 * dmax + 2) {
        let snapshot: Vec<TowerElem> = a_prime.iter().cloned().collect();
        for x in &snapshot {
            for y in &products {
                a_prime.insert(base.add(x, y)?);
            }
            if a_prime.len() > CLOSURE_CAP {
                return Err(Error::BudgetExceeded {
                    needed: a_prime.len() as u64,
                    budget: CLOSURE_CAP as u64,
                });
            }
        }
    }
    let a_prime: Vec<TowerElem> = a_prime.into_iter().collect();
    let base_emb = local_embed_stage(base, &a_prime)?;
    // f*: polynomials over the base -> polynomials over the codomain.
    let push_poly = |p: &Vec<TowerElem>| -> Result<Vec<RingScalar>> {
        p.iter().map(|c| base_emb.lookup(c)).collect()
    };
    // Build concrete fractions over the codomain and evaluate.
    let codomain_ratfun = CoeffRing::rat_fun_over(&base_emb.codomain)?;
    let fractions: Vec<RingScalar> = domain
        .iter()
        .map(|x| {
            let TowerElem::Fraction(n, d) = x else {
                unreachable!()
            };
            let num = push_poly(n)?
                .iter()
                .map(scalar_to_coeffs)
                .collect::<Result<Vec<_>>>()?;
            let den = push_poly(d)?
                .iter()
                .map(scalar_to_coeffs)
                .collect::<Result<Vec<_>>>()?;
            codomain_ratfun.fraction(num, den)
        })
        .collect::<Result<_>>()?;
    let (witness, eval) = local_embed_eval(&fractions)?;
    let map = domain
        .iter()
        .zip(&witness.mapping)
        .map(|(x, t)| match t {
            TargetElem::Scalar(s) => Ok((x.clone(), s.clone())),
            _ => Err(Error::Mismatch),
        })
        .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
    Ok(StageEmbedding {
        codomain: eval.field.clone(),
        map,
        eval: Some(eval),
    })
}

fn scalar_to_coeffs(s: &RingScalar) -> Result<Vec<u64>> {
    match &s.repr {
        ScalarRepr::Poly(v) => Ok(v.clone()),
        _ => Err(Error::Mismatch),
    }
}

/// The algebraic-extension local embedding as a standalone operation:
/// source = base[x]/(modulus), verified end to end.
pub fn local_embed_algebraic(
    base: TowerField,
    modulus: Vec<TowerElem>,
    domain: &[TowerElem],
) -> Result<(LocalEmbeddingWitness, CoeffRing)> {
    let modulus = ptrim(&base, modulus);
    if modulus.len() < 2 || *modulus.last().unwrap() != base.one() {
        return Err(Error::Unsupported("modulus must be monic of degree >= 1".into()));
    }
    if !is_irreducible_over(&base, &modulus)? {
        return Err(Error::NotIrreducible);
    }
    let field = TowerField::Algebraic {
        base: Arc::new(base),
        modulus,
    };
    let stage = local_embed_stage(&field, domain)?;
    let mapping = domain
        .iter()
        .map(|x| Ok(TargetElem::Scalar(stage.lookup(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let witness = expect_verified(LocalEmbeddingWitness {
        source: field,
        domain: domain.to_vec(),
        mapping,
        checked_sums: vec![],
        checked_products: vec![],
    })?;
    Ok((witness, stage.codomain))
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub tower: TowerField,
    /// Stage witness into the final finite field.
    pub scalar_witness: LocalEmbeddingWitness,
    /// End-to-end witness into d×d matrices over F_p.
    pub matrix_witness: LocalEmbeddingWitness,
    pub final_field: CoeffRing,
    pub dimension: usize,
    pub eval: Option<EvalData>,
}

/// Peels a tower top-down into some GF(p^k), then applies the regular
/// representation into k×k matrices over F_p; the final witness is
/// verified on every in-domain triple.
pub fn local_embed_pipeline(
    p: u64,
    steps: &[FieldTowerStep],
    domain: Vec<TowerElem>,
) -> Result<PipelineResult> {
    let tower = build_tower(p, steps)?;
    let stage = local_embed_stage(&tower, &domain)?;
    let scalar_mapping = domain
        .iter()
        .map(|x| Ok(TargetElem::Scalar(stage.lookup(x)?)))
        .collect::<Result<Vec<_>>>()?;
    let scalar_witness = expect_verified(LocalEmbeddingWitness {
        source: tower.clone(),
        domain: domain.clone(),
        mapping: scalar_mapping,
        checked_sums: vec![],
        checked_products: vec![],
    })?;
    let (matrix_emb, _) = embed_gf_into_matrices(&stage.codomain)?;
    let matrix_mapping = domain
        .iter()
        .map(|x| Ok(TargetElem::Matrix(matrix_emb.apply(&stage.lookup(x)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let matrix_witness = expect_verified(LocalEmbeddingWitness {
        source: tower.clone(),
        domain,
        mapping: matrix_mapping,
        checked_sums: vec![],
        checked_products: vec![],
    })?;
    let CoeffRing::Gf(gf) = &stage.codomain else {
        unreachable!()
    };
    Ok(PipelineResult {
        tower,
        scalar_witness,
        matrix_witness,
        final_field: stage.codomain.clone(),
        dimension: gf.k,
        eval: stage.eval,
    })
}

/// Transports a group-ring identity through a local embedding
/// coefficientwise: Σ z·δ ↦ Σ f(z)·δ. This is the ingredient
/// construction behind the reduction of stable finiteness to F_p.
pub fn transport_group_ring_element(
    witness: &LocalEmbeddingWitness,
    element_terms: &[(crate::groups::GroupElement, TowerElem)],
    group: &Group,
) -> Result<Vec<(crate::groups::GroupElement, TargetElem)>> {
    element_terms
        .iter()
        .map(|(g, c)| {
            let idx = witness
                .domain
                .iter()
                .position(|d| d == c)
                .ok_or_else(|| Error::BaseEmbeddingUnavailable(format!("{c}")))?;
            if g.group() != group {
                return Err(Error::GroupMismatch);
            }
            Ok((g.clone(), witness.mapping[idx].clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2_ratfun() -> CoeffRing {
        CoeffRing::rat_fun_over(&make_gf(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn tower_arithmetic_in_f4() {
        // F_2[x]/(x^2+x+1): t * t = t + 1.
        let tower = build_tower(
            2,
            &[FieldTowerStep::Algebraic(poly_over_prime(2, &[1, 1, 1]))],
        )
        .unwrap();
        let t = TowerElem::Poly(vec![
            tower_zero_base(&tower),
            tower_one_base(&tower),
        ]);
        let t2 = tower.mul(&t, &t).unwrap();
        let expected = TowerElem::Poly(vec![tower_one_base(&tower), tower_one_base(&tower)]);
        assert_eq!(t2, expected);
        // Inverse: t * t^{-1} = 1.
        let tinv = tower.inv(&t).unwrap();
        assert_eq!(tower.mul(&t, &tinv).unwrap(), tower.one());
    }

    fn poly_over_prime(p: u64, coeffs: &[i64]) -> Vec<TowerElem> {
        let f = TowerField::prime_field(p).unwrap();
        coeffs.iter().map(|&c| f.from_int(c)).collect()
    }

    fn tower_zero_base(t: &TowerField) -> TowerElem {
        match t {
            TowerField::Algebraic { base, .. } => base.zero(),
            _ => panic!(),
        }
    }

    fn tower_one_base(t: &TowerField) -> TowerElem {
        match t {
            TowerField::Algebraic { base, .. } => base.one(),
            _ => panic!(),
        }
    }

    #[test]
    fn build_tower_rejects_reducible() {
        // x^2 + 1 = (x+1)^2 over F_2.
        let err = build_tower(2, &[FieldTowerStep::Algebraic(poly_over_prime(2, &[1, 0, 1]))]);
        assert_eq!(err.unwrap_err(), Error::NotIrreducible);
    }

    #[test]
    fn verify_catches_broken_witness() {
        // F_4 -> F_2 sending everything to 0 breaks identity preservation.
        let f4 = make_gf(2, 2).unwrap();
        let f2 = make_gf(2, 1).unwrap();
        let source = TowerField::Base(f4.clone());
        let mut w = LocalEmbeddingWitness {
            source,
            domain: vec![
                TowerElem::Base(f4.zero()),
                TowerElem::Base(f4.one()),
            ],
            mapping: vec![
                TargetElem::Scalar(f2.zero()),
                TargetElem::Scalar(f2.zero()),
            ],
            checked_sums: vec![],
            checked_products: vec![],
        };
        assert!(matches!(
            verify_local_embedding(&mut w).unwrap(),
            VerifyOutcome::Violation(_)
        ));
    }

    #[test]
    fn inclusion_witness_verifies() {
        // {0, 1} from F_2 into F_4 via the subfield embedding.
        let f2 = make_gf(2, 1).unwrap();
        let f4 = make_gf(2, 2).unwrap();
        let emb = GfEmbedding::new(&f2, &f4).unwrap();
        let mut w = LocalEmbeddingWitness {
            source: TowerField::Base(f2.clone()),
            domain: vec![TowerElem::Base(f2.zero()), TowerElem::Base(f2.one())],
            mapping: vec![
                TargetElem::Scalar(emb.apply(&f2.zero()).unwrap()),
                TargetElem::Scalar(emb.apply(&f2.one()).unwrap()),
            ],
            checked_sums: vec![],
            checked_products: vec![],
        };
        assert_eq!(verify_local_embedding(&mut w).unwrap(), VerifyOutcome::Verified);
        assert!(!w.checked_sums.is_empty());
    }

    #[test]
    fn regular_representation_f4() {
        // x ↦ [[0,1],[1,1]] and M^2 + M + I = 0.
        let f4 = make_gf(2, 2).unwrap();
        let (emb, witness) = embed_gf_into_matrices(&f4).unwrap();
        let x = f4.gf_element(vec![0, 1]).unwrap();
        let m = emb.apply(&x).unwrap();
        let f2 = make_gf(2, 1).unwrap();
        let expected = RingMatrix::from_scalars(
            f2.clone(),
            2,
            vec![f2.from_int(0), f2.from_int(1), f2.from_int(1), f2.from_int(1)],
        )
        .unwrap();
        assert_eq!(m, expected);
        let m2 = m.mul(&m).unwrap();
        let i = RingMatrix::identity(f2.clone(), Group::trivial(), 2);
        assert!(m2.add(&m).unwrap().add(&i).unwrap().entries().iter().all(|e| e.is_zero()));
        assert_eq!(witness.domain.len(), 4);
    }

    #[test]
    fn regular_representation_f9() {
        // Over F_3 with modulus x^2+1: x ↦ [[0,1],[-1,0]] = [[0,1],[2,0]].
        let f9 = make_gf(3, 2).unwrap();
        let (emb, _) = embed_gf_into_matrices(&f9).unwrap();
        let x = f9.gf_element(vec![0, 1]).unwrap();
        let m = emb.apply(&x).unwrap();
        let f3 = make_gf(3, 1).unwrap();
        let expected = RingMatrix::from_scalars(
            f3.clone(),
            2,
            vec![f3.from_int(0), f3.from_int(1), f3.from_int(2), f3.from_int(0)],
        )
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn regular_representation_f2_is_identity() {
        let f2 = make_gf(2, 1).unwrap();
        let (emb, _) = embed_gf_into_matrices(&f2).unwrap();
        let one = emb.apply(&f2.one()).unwrap();
        assert!(one.is_identity());
        assert_eq!(one.dim(), 1);
    }

    #[test]
    fn eval_on_constants() {
        // F = {0, 1} ⊂ F_2(t): alpha = 0.
        let r = f2_ratfun();
        let (w, data) = local_embed_eval(&[r.from_int(0), r.from_int(1)]).unwrap();
        assert_eq!(data.alpha, make_gf(2, 1).unwrap().zero());
        assert_eq!(data.extensions, 0);
        assert_eq!(w.domain.len(), 2);
    }

    #[test]
    fn eval_on_t_and_t_plus_1() {
        // F = {t, t+1}: the cross-difference is constant 1 (no roots), the
        // denominators are 1: alpha = 0 works and gives {0, 1}.
        let r = f2_ratfun();
        let t = r.fraction(vec![vec![], vec![1]], vec![vec![1]]).unwrap();
        let t1 = r.fraction(vec![vec![1], vec![1]], vec![vec![1]]).unwrap();
        let (w, data) = local_embed_eval(&[t, t1]).unwrap();
        assert_eq!(data.extensions, 0);
        assert_eq!(data.alpha, make_gf(2, 1).unwrap().zero());
        let TargetElem::Scalar(v0) = &w.mapping[0] else { panic!() };
        let TargetElem::Scalar(v1) = &w.mapping[1] else { panic!() };
        assert!(v0.is_zero());
        assert!(v1.is_one());
    }

    #[test]
    fn eval_with_forced_extension() {
        // F = {1/t, 1/(t+1)}: denominators exclude all of F_2, so the
        // field extends to F_4 and alpha = x works.
        let r = f2_ratfun();
        let inv_t = r.fraction(vec![vec![1]], vec![vec![], vec![1]]).unwrap();
        let inv_t1 = r
            .fraction(vec![vec![1]], vec![vec![1], vec![1]])
            .unwrap();
        let (_, data) = local_embed_eval(&[inv_t, inv_t1]).unwrap();
        assert_eq!(data.extensions, 1);
        let f4 = make_gf(2, 2).unwrap();
        assert_eq!(data.field, f4);
        assert_eq!(data.alpha, f4.gf_element(vec![0, 1]).unwrap()); // x
    }

    #[test]
    fn algebraic_embedding_of_f4_generators() {
        // K=F_2, P = x^2+x+1, F = {t, t+1}: t' = lex-first root in F_4.
        let base = TowerField::prime_field(2).unwrap();
        let modulus = poly_over_prime(2, &[1, 1, 1]);
        let field = TowerField::Algebraic {
            base: Arc::new(base.clone()),
            modulus: modulus.clone(),
        };
        let t = TowerElem::Poly(vec![base.zero(), base.one()]);
        let t1 = field.add(&t, &field.one()).unwrap();
        let (w, codomain) =
            local_embed_algebraic(base, modulus, &[t.clone(), t1.clone()]).unwrap();
        assert_eq!(codomain, make_gf(2, 2).unwrap());
        let f4 = make_gf(2, 2).unwrap();
        let TargetElem::Scalar(img_t) = &w.mapping[0] else { panic!() };
        assert_eq!(*img_t, f4.gf_element(vec![0, 1]).unwrap());
    }

    #[test]
    fn algebraic_embedding_identity_like_for_constants() {
        // F = {0, 1}: constants map to constants regardless of P.
        let base = TowerField::prime_field(2).unwrap();
        let modulus = poly_over_prime(2, &[1, 1, 1]);
        let field = TowerField::Algebraic {
            base: Arc::new(base.clone()),
            modulus: modulus.clone(),
        };
        let (w, _) =
            local_embed_algebraic(base, modulus, &[field.zero(), field.one()]).unwrap();
        let TargetElem::Scalar(z) = &w.mapping[0] else { panic!() };
        let TargetElem::Scalar(o) = &w.mapping[1] else { panic!() };
        assert!(z.is_zero() && o.is_one());
    }

    #[test]
    fn algebraic_over_transcendental_base() {
        // K = F_2(u), t algebraic with P = x^2+x+1 (constant coefficients),
        // base embedding by evaluation of the u-coefficients.
        let prime = TowerField::prime_field(2).unwrap();
        let ratfun = TowerField::RatFun {
            base: Arc::new(prime.clone()),
        };
        let c = |n: i64| ratfun.from_int(n);
        let modulus = vec![c(1), c(1), c(1)];
        let field = TowerField::Algebraic {
            base: Arc::new(ratfun.clone()),
            modulus: modulus.clone(),
        };
        let t = TowerElem::Poly(vec![ratfun.zero(), ratfun.one()]);
        let t1 = field.add(&t, &field.one()).unwrap();
        let (w, _) = local_embed_algebraic(ratfun, modulus, &[t, t1]).unwrap();
        assert_eq!(w.domain.len(), 2);
    }

    #[test]
    fn pipeline_empty_tower() {
        // F ⊂ F_p maps through 1×1 matrices.
        let f2 = TowerField::prime_field(2).unwrap();
        let result =
            local_embed_pipeline(2, &[], vec![f2.zero(), f2.one()]).unwrap();
        assert_eq!(result.dimension, 1);
        let TargetElem::Matrix(m) = &result.matrix_witness.mapping[1] else {
            panic!()
        };
        assert!(m.is_identity());
    }

    #[test]
    fn pipeline_whole_f4() {
        // Tower [algebraic x^2+x+1], F = all of F_4: 2×2 matrices over
        // F_2, verified on all 16 pairs.
        let steps = vec![FieldTowerStep::Algebraic(poly_over_prime(2, &[1, 1, 1]))];
        let tower = build_tower(2, &steps).unwrap();
        let domain = tower.enumerate().unwrap();
        let result = local_embed_pipeline(2, &steps, domain).unwrap();
        assert_eq!(result.dimension, 2);
        assert_eq!(result.matrix_witness.domain.len(), 4);
        // All sums and products stay in-domain, so the verifier exercised
        // every pair.
        assert_eq!(result.matrix_witness.checked_sums.len(), 16);
        assert_eq!(result.matrix_witness.checked_products.len(), 16);
    }

    #[test]
    fn pipeline_two_step_tower() {
        // Tower [algebraic x^2+x+1, transcendental], F = {t, 1/t, x·t}.
        let steps = vec![
            FieldTowerStep::Algebraic(poly_over_prime(2, &[1, 1, 1])),
            FieldTowerStep::Transcendental,
        ];
        let tower = build_tower(2, &steps).unwrap();
        let TowerField::RatFun { base } = &tower else {
            panic!()
        };
        let x_elem = TowerElem::Poly(vec![
            TowerField::prime_field(2).unwrap().zero(),
            TowerField::prime_field(2).unwrap().one(),
        ]);
        let t = TowerElem::Fraction(vec![base.zero(), base.one()], vec![base.one()]);
        let inv_t = tower.inv(&t).unwrap();
        let xt = TowerElem::Fraction(vec![base.zero(), x_elem.clone()], vec![base.one()]);
        let result = local_embed_pipeline(2, &steps, vec![t, inv_t, xt]).unwrap();
        // Evaluation stays in F_4: the denominators only exclude 0, and
        // the cross-differences exclude 1 and x, leaving alpha = x+1.
        let eval = result.eval.as_ref().unwrap();
        assert_eq!(eval.field, make_gf(2, 2).unwrap());
        assert_eq!(
            eval.alpha,
            make_gf(2, 2).unwrap().gf_element(vec![1, 1]).unwrap()
        );
        assert_eq!(result.dimension, 2);
        // The pipeline witness agrees with the composition of the stage
        // witness and the matrix embedding.
        let (emb, _) = embed_gf_into_matrices(&result.final_field).unwrap();
        for (i, m) in result.matrix_witness.mapping.iter().enumerate() {
            let TargetElem::Scalar(s) = &result.scalar_witness.mapping[i] else {
                panic!()
            };
            let TargetElem::Matrix(mm) = m else { panic!() };
            assert_eq!(*mm, emb.apply(s).unwrap());
        }
    }

    #[test]
    fn nested_transcendental_stage_embedding() {
        // F_2 -> F_2(t) -> F_2(t)(u), domain {u, t*u, 1/u}: two nested
        // evaluation steps; the inner one embeds the closure set of the
        // u-coefficients, the outer one evaluates u.
        let steps = vec![
            FieldTowerStep::Transcendental,
            FieldTowerStep::Transcendental,
        ];
        let tower = build_tower(2, &steps).unwrap();
        let TowerField::RatFun { base } = &tower else {
            panic!()
        };
        let TowerField::RatFun { base: inner } = &**base else {
            panic!()
        };
        let t_inner = TowerElem::Fraction(vec![inner.zero(), inner.one()], vec![inner.one()]);
        let u = TowerElem::Fraction(vec![base.zero(), base.one()], vec![base.one()]);
        let tu = TowerElem::Fraction(vec![base.zero(), t_inner], vec![base.one()]);
        let inv_u = tower.inv(&u).unwrap();
        let domain = vec![u, tu, inv_u];
        let stage = local_embed_stage(&tower, &domain).unwrap();
        let mapping = domain
            .iter()
            .map(|x| TargetElem::Scalar(stage.lookup(x).unwrap()))
            .collect();
        let mut w = LocalEmbeddingWitness {
            source: tower,
            domain,
            mapping,
            checked_sums: vec![],
            checked_products: vec![],
        };
        assert_eq!(
            verify_local_embedding(&mut w).unwrap(),
            VerifyOutcome::Verified
        );
    }

    #[test]
    fn pipeline_degree_three_step() {
        // F_8 via x^3+x+1: 3×3 matrices, all 64 pairs verified.
        let prime = TowerField::prime_field(2).unwrap();
        let modulus: Vec<TowerElem> =
            [1i64, 1, 0, 1].iter().map(|&c| prime.from_int(c)).collect();
        let steps = vec![FieldTowerStep::Algebraic(modulus)];
        let tower = build_tower(2, &steps).unwrap();
        let domain = tower.enumerate().unwrap();
        let result = local_embed_pipeline(2, &steps, domain).unwrap();
        assert_eq!(result.dimension, 3);
        assert_eq!(result.matrix_witness.checked_products.len(), 64);
    }

    #[test]
    fn pipeline_characteristic_three() {
        // F_9 via x^2+1 over F_3: 2×2 matrices over F_3.
        let prime = TowerField::prime_field(3).unwrap();
        let modulus: Vec<TowerElem> = [1i64, 0, 1].iter().map(|&c| prime.from_int(c)).collect();
        let steps = vec![FieldTowerStep::Algebraic(modulus)];
        let tower = build_tower(3, &steps).unwrap();
        let domain = tower.enumerate().unwrap();
        let result = local_embed_pipeline(3, &steps, domain).unwrap();
        assert_eq!(result.dimension, 2);
        assert_eq!(result.matrix_witness.checked_sums.len(), 81);
    }

    #[test]
    fn transport_identity_through_witness() {
        // Coefficientwise transport of a group-ring identity: (1+g)(1+g)=0
        // in F_4[C2] transports to matrices with the same relation.
        let f4 = make_gf(2, 2).unwrap();
        let (_, witness) = embed_gf_into_matrices(&f4).unwrap();
        let c2 = Group::cyclic(2);
        let g = c2
            .element(crate::groups::Payload::Residue(1))
            .unwrap();
        let one_term = (c2.identity(), TowerElem::Base(f4.one()));
        let g_term = (g, TowerElem::Base(f4.one()));
        let transported =
            transport_group_ring_element(&witness, &[one_term, g_term], &c2).unwrap();
        assert_eq!(transported.len(), 2);
        let TargetElem::Matrix(m) = &transported[0].1 else { panic!() };
        assert!(m.is_identity());
    }
}
