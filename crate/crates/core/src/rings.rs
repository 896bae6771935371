//! Exact coefficient rings and group rings.
//!
//! Coefficient rings: unbounded integers, ℤ/nℤ, GF(p^k) with a canonical
//! irreducible modulus, and rational functions over GF(p^k) kept in lowest
//! terms with monic denominator. Group rings R[Γ] are finitely supported
//! maps Γ→R in canonical form (sorted support, no zero coefficients) with
//! convolution product, augmentation and pushforward.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, GroupHom};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// Polynomials over F_p (coefficients as u64 residues, ascending, trimmed)
// ---------------------------------------------------------------------------

pub(crate) fn poly_trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub(crate) fn poly_add(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + y) % p;
    }
    poly_trim(out)
}

pub(crate) fn poly_neg(p: u64, a: &[u64]) -> Vec<u64> {
    a.iter().map(|&x| (p - x % p) % p).collect()
}

pub(crate) fn poly_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_trim(out)
}

/// Division with remainder by a monic polynomial.
pub(crate) fn poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    debug_assert_eq!(*m.last().unwrap(), 1, "modulus must be monic");
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                let idx = i + shift;
                r[idx] = (r[idx] + (p - (lead * c) % p)) % p;
            }
        }
        r.pop();
        r = poly_trim(r);
        if r.is_empty() {
            break;
        }
    }
    poly_trim(r)
}

fn mod_inv_u64(a: u64, n: u64) -> Option<u64> {
    // Extended Euclid over the integers.
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    let n = n as i128;
    Some(((t0 % n + n) % n) as u64)
}

/// Inverse of `a` modulo the monic irreducible `m` over F_p.
pub(crate) fn poly_inv_mod(p: u64, a: &[u64], m: &[u64]) -> Option<Vec<u64>> {
    if poly_trim(a.to_vec()).is_empty() {
        return None;
    }
    // Extended Euclid in F_p[x].
    let mut r0 = m.to_vec();
    let mut r1 = poly_rem(p, a, m);
    let mut t0: Vec<u64> = vec![];
    let mut t1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        let (q, r) = poly_divmod(p, &r0, &r1);
        let t = poly_add(p, &t0, &poly_neg(p, &poly_mul(p, &q, &t1)));
        r0 = r1;
        r1 = r;
        t0 = t1;
        t1 = t;
    }
    if r0.len() != 1 {
        return None; // gcd not a unit: `a` shares a factor with m
    }
    let scale = mod_inv_u64(r0[0], p)?;
    Some(poly_trim(
        t0.iter().map(|&c| (c * scale) % p).collect::<Vec<_>>(),
    ))
}

/// Full division: returns (quotient, remainder); divisor need not be monic.
pub(crate) fn poly_divmod(p: u64, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let b = poly_trim(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let lead_inv = mod_inv_u64(*b.last().unwrap(), p).expect("p prime");
    let mut r = poly_trim(a.to_vec());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - 1 - db;
        let coeff = (*r.last().unwrap() * lead_inv) % p;
        q[shift] = coeff;
        for (i, &c) in b.iter().enumerate() {
            let idx = i + shift;
            r[idx] = (r[idx] + (p - (coeff * c) % p)) % p;
        }
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Irreducibility by trial division by lower-degree monic polynomials
/// (degree up to deg/2 suffices: any factorization has such a factor).
pub(crate) fn poly_is_irreducible(p: u64, f: &[u64]) -> bool {
    let f = poly_trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let deg = f.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // All monic polynomials of degree d, low coefficients as base-p counter.
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut v = idx;
            for _ in 0..d {
                g.push(v % p);
                v /= p;
            }
            g.push(1);
            let (_, r) = poly_divmod(p, &f, &g);
            if r.is_empty() {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Coefficient rings
// ---------------------------------------------------------------------------

/// Parameters of GF(p^k): the prime, the degree, and a monic irreducible
/// modulus of degree k (coefficients ascending, length k+1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GfParams {
    pub p: u64,
    pub k: usize,
    pub modulus: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoeffRing {
    /// Unbounded integers.
    Integers,
    /// ℤ/nℤ with n >= 2 (not necessarily prime).
    ZMod(u64),
    /// GF(p^k).
    Gf(GfParams),
    /// Rational functions over GF(p^k), lowest terms, monic denominator.
    RatFun(GfParams),
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::Integers => write!(f, "Z"),
            CoeffRing::ZMod(n) => write!(f, "Z/{n}"),
            CoeffRing::Gf(gf) => {
                if gf.k == 1 {
                    write!(f, "F{}", gf.p)
                } else {
                    write!(f, "F{}", gf.p.pow(gf.k as u32))
                }
            }
            CoeffRing::RatFun(gf) => {
                if gf.k == 1 {
                    write!(f, "F{}(t)", gf.p)
                } else {
                    write!(f, "F{}(t)", gf.p.pow(gf.k as u32))
                }
            }
        }
    }
}

/// Canonical scalar payload.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScalarRepr {
    Int(BigInt),
    Residue(u64),
    /// GF element: polynomial of degree < k, ascending, trimmed.
    Poly(Vec<u64>),
    /// Rational function: numerator/denominator over GF(p^k), each a
    /// polynomial with GF-element coefficients; coprime, denominator monic.
    Fraction(Vec<Vec<u64>>, Vec<Vec<u64>>),
}

/// An element of a coefficient ring, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RingScalar {
    pub ring: CoeffRing,
    pub repr: ScalarRepr,
}

/// Constructs GF(p, k) with the canonical modulus: the lexicographically
/// smallest monic irreducible of degree k (low coefficients enumerated as
/// a base-p counter).
pub fn make_gf(p: u64, k: usize) -> Result<CoeffRing> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    assert!(k >= 1, "k >= 1");
    let count = p
        .checked_pow(k as u32)
        .expect("field size fits in u64 at desk scale");
    for idx in 0..count {
        let mut f = Vec::with_capacity(k + 1);
        let mut v = idx;
        for _ in 0..k {
            f.push(v % p);
            v /= p;
        }
        f.push(1);
        if poly_is_irreducible(p, &f) {
            return Ok(CoeffRing::Gf(GfParams { p, k, modulus: f }));
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

impl CoeffRing {
    pub fn integers() -> CoeffRing {
        CoeffRing::Integers
    }

    pub fn z_mod(n: u64) -> CoeffRing {
        assert!(n >= 2, "z_mod modulus >= 2");
        CoeffRing::ZMod(n)
    }

    pub fn rat_fun_over(gf: &CoeffRing) -> Result<CoeffRing> {
        match gf {
            CoeffRing::Gf(params) => Ok(CoeffRing::RatFun(params.clone())),
            _ => Err(Error::RingMismatch("rat_fun base must be a gf field".into())),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CoeffRing::ZMod(_) | CoeffRing::Gf(_))
    }

    /// Number of elements for finite rings.
    pub fn size(&self) -> Option<u64> {
        match self {
            CoeffRing::ZMod(n) => Some(*n),
            CoeffRing::Gf(gf) => Some(gf.p.pow(gf.k as u32)),
            _ => None,
        }
    }

    /// Characteristic of the ring (0 for the integers).
    pub fn characteristic(&self) -> u64 {
        match self {
            CoeffRing::Integers => 0,
            CoeffRing::ZMod(n) => *n,
            CoeffRing::Gf(gf) | CoeffRing::RatFun(gf) => gf.p,
        }
    }

    pub fn zero(&self) -> RingScalar {
        let repr = match self {
            CoeffRing::Integers => ScalarRepr::Int(BigInt::zero()),
            CoeffRing::ZMod(_) => ScalarRepr::Residue(0),
            CoeffRing::Gf(_) => ScalarRepr::Poly(vec![]),
            CoeffRing::RatFun(_) => ScalarRepr::Fraction(vec![], vec![vec![1]]),
        };
        RingScalar {
            ring: self.clone(),
            repr,
        }
    }

    pub fn one(&self) -> RingScalar {
        let repr = match self {
            CoeffRing::Integers => ScalarRepr::Int(BigInt::one()),
            CoeffRing::ZMod(_) => ScalarRepr::Residue(1),
            CoeffRing::Gf(_) => ScalarRepr::Poly(vec![1]),
            CoeffRing::RatFun(_) => ScalarRepr::Fraction(vec![vec![1]], vec![vec![1]]),
        };
        RingScalar {
            ring: self.clone(),
            repr,
        }
    }

    /// The image of an integer under the canonical map Z -> R.
    pub fn from_int(&self, n: i64) -> RingScalar {
        match self {
            CoeffRing::Integers => RingScalar {
                ring: self.clone(),
                repr: ScalarRepr::Int(BigInt::from(n)),
            },
            CoeffRing::ZMod(m) => RingScalar {
                ring: self.clone(),
                repr: ScalarRepr::Residue(n.rem_euclid(*m as i64) as u64),
            },
            CoeffRing::Gf(gf) => {
                let r = n.rem_euclid(gf.p as i64) as u64;
                RingScalar {
                    ring: self.clone(),
                    repr: ScalarRepr::Poly(poly_trim(vec![r])),
                }
            }
            CoeffRing::RatFun(gf) => {
                let r = n.rem_euclid(gf.p as i64) as u64;
                let num = if r == 0 { vec![] } else { vec![vec![r]] };
                RingScalar {
                    ring: self.clone(),
                    repr: ScalarRepr::Fraction(num, vec![vec![1]]),
                }
            }
        }
    }

    /// GF element from ascending coefficients.
    pub fn gf_element(&self, coeffs: Vec<u64>) -> Result<RingScalar> {
        let CoeffRing::Gf(gf) = self else {
            return Err(Error::RingMismatch("not a gf ring".into()));
        };
        let c: Vec<u64> = coeffs.iter().map(|&x| x % gf.p).collect();
        let reduced = poly_rem(gf.p, &c, &gf.modulus);
        Ok(RingScalar {
            ring: self.clone(),
            repr: ScalarRepr::Poly(reduced),
        })
    }

    /// Rational function from numerator/denominator polynomials whose
    /// coefficients are GF elements given as ascending F_p coefficients.
    pub fn fraction(&self, num: Vec<Vec<u64>>, den: Vec<Vec<u64>>) -> Result<RingScalar> {
        let CoeffRing::RatFun(gf) = self else {
            return Err(Error::RingMismatch("not a rat_fun ring".into()));
        };
        let num: Vec<Vec<u64>> = num
            .into_iter()
            .map(|c| poly_rem(gf.p, &c, &gf.modulus))
            .collect();
        let den: Vec<Vec<u64>> = den
            .into_iter()
            .map(|c| poly_rem(gf.p, &c, &gf.modulus))
            .collect();
        let num = gfpoly_trim(num);
        let den = gfpoly_trim(den);
        if den.is_empty() {
            return Err(Error::NotAUnit);
        }
        let (num, den) = fraction_reduce(gf, num, den);
        Ok(RingScalar {
            ring: self.clone(),
            repr: ScalarRepr::Fraction(num, den),
        })
    }

    /// All elements of a finite coefficient ring in canonical order.
    pub fn enumerate(&self) -> Result<Vec<RingScalar>> {
        match self {
            CoeffRing::ZMod(n) => Ok((0..*n)
                .map(|r| RingScalar {
                    ring: self.clone(),
                    repr: ScalarRepr::Residue(r),
                })
                .collect()),
            CoeffRing::Gf(gf) => {
                let size = gf.p.pow(gf.k as u32);
                Ok((0..size)
                    .map(|idx| {
                        let mut c = Vec::with_capacity(gf.k);
                        let mut v = idx;
                        for _ in 0..gf.k {
                            c.push(v % gf.p);
                            v /= gf.p;
                        }
                        RingScalar {
                            ring: self.clone(),
                            repr: ScalarRepr::Poly(poly_trim(c)),
                        }
                    })
                    .collect())
            }
            _ => Err(Error::Unsupported("enumeration of an infinite ring".into())),
        }
    }

    pub fn random_scalar(&self, rng: &mut SplitMix64) -> RingScalar {
        match self {
            CoeffRing::Integers => RingScalar {
                ring: self.clone(),
                repr: ScalarRepr::Int(BigInt::from(rng.signed(20))),
            },
            CoeffRing::ZMod(n) => RingScalar {
                ring: self.clone(),
                repr: ScalarRepr::Residue(rng.below(*n)),
            },
            CoeffRing::Gf(gf) => {
                let c: Vec<u64> = (0..gf.k).map(|_| rng.below(gf.p)).collect();
                RingScalar {
                    ring: self.clone(),
                    repr: ScalarRepr::Poly(poly_trim(c)),
                }
            }
            CoeffRing::RatFun(gf) => {
                // Random fraction with small numerator and denominator.
                let rand_poly = |rng: &mut SplitMix64| -> Vec<Vec<u64>> {
                    let deg = rng.below(3) as usize;
                    (0..=deg)
                        .map(|_| poly_trim((0..gf.k).map(|_| rng.below(gf.p)).collect()))
                        .collect()
                };
                let num = gfpoly_trim(rand_poly(rng));
                let mut den = gfpoly_trim(rand_poly(rng));
                if den.is_empty() {
                    den = vec![vec![1]];
                }
                let (num, den) = fraction_reduce(gf, num, den);
                RingScalar {
                    ring: self.clone(),
                    repr: ScalarRepr::Fraction(num, den),
                }
            }
        }
    }
}

// Polynomials with GF-coefficients (used by rat_fun): ascending, trimmed.

pub(crate) fn gfpoly_trim(mut v: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    while v.last().map(|c| c.is_empty()) == Some(true) {
        v.pop();
    }
    v
}

pub(crate) fn gf_add(gf: &GfParams, a: &[u64], b: &[u64]) -> Vec<u64> {
    poly_add(gf.p, a, b)
}

pub(crate) fn gf_mul(gf: &GfParams, a: &[u64], b: &[u64]) -> Vec<u64> {
    poly_rem(gf.p, &poly_mul(gf.p, a, b), &gf.modulus)
}

pub(crate) fn gf_neg(gf: &GfParams, a: &[u64]) -> Vec<u64> {
    poly_trim(poly_neg(gf.p, a))
}

pub(crate) fn gf_inv(gf: &GfParams, a: &[u64]) -> Option<Vec<u64>> {
    poly_inv_mod(gf.p, a, &gf.modulus)
}

pub(crate) fn gfpoly_add(gf: &GfParams, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = a.len().max(b.len());
    let empty: Vec<u64> = vec![];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).unwrap_or(&empty);
        let y = b.get(i).unwrap_or(&empty);
        out.push(gf_add(gf, x, y));
    }
    gfpoly_trim(out)
}

pub(crate) fn gfpoly_neg(gf: &GfParams, a: &[Vec<u64>]) -> Vec<Vec<u64>> {
    a.iter().map(|c| gf_neg(gf, c)).collect()
}

pub(crate) fn gfpoly_mul(gf: &GfParams, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![vec![]; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = gf_add(gf, &out[i + j], &gf_mul(gf, x, y));
        }
    }
    gfpoly_trim(out)
}

pub(crate) fn gfpoly_divmod(
    gf: &GfParams,
    a: &[Vec<u64>],
    b: &[Vec<u64>],
) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let b = gfpoly_trim(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let lead_inv = gf_inv(gf, b.last().unwrap()).expect("field");
    let mut r = gfpoly_trim(a.to_vec());
    let db = b.len() - 1;
    let mut q: Vec<Vec<u64>> = vec![vec![]; r.len().saturating_sub(db)];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let coeff = gf_mul(gf, r.last().unwrap(), &lead_inv);
        q[shift] = coeff.clone();
        for (i, c) in b.iter().enumerate() {
            let sub = gf_mul(gf, &coeff, c);
            r[i + shift] = gf_add(gf, &r[i + shift], &gf_neg(gf, &sub));
        }
        r = gfpoly_trim(r);
    }
    (gfpoly_trim(q), r)
}

pub(crate) fn gfpoly_gcd(gf: &GfParams, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut r0 = gfpoly_trim(a.to_vec());
    let mut r1 = gfpoly_trim(b.to_vec());
    while !r1.is_empty() {
        let (_, r) = gfpoly_divmod(gf, &r0, &r1);
        r0 = r1;
        r1 = r;
    }
    r0
}

/// Scales a nonzero polynomial to be monic.
pub(crate) fn gfpoly_monic(gf: &GfParams, a: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let a = gfpoly_trim(a.to_vec());
    if a.is_empty() {
        return a;
    }
    let inv = gf_inv(gf, a.last().unwrap()).expect("field");
    a.iter().map(|c| gf_mul(gf, c, &inv)).collect()
}

fn fraction_reduce(
    gf: &GfParams,
    num: Vec<Vec<u64>>,
    den: Vec<Vec<u64>>,
) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    if num.is_empty() {
        return (vec![], vec![vec![1]]);
    }
    let g = gfpoly_monic(gf, &gfpoly_gcd(gf, &num, &den));
    let (num, _) = gfpoly_divmod(gf, &num, &g);
    let (den, _) = gfpoly_divmod(gf, &den, &g);
    // Normalize to monic denominator.
    let lead_inv = gf_inv(gf, den.last().unwrap()).expect("field");
    let num: Vec<Vec<u64>> = num.iter().map(|c| gf_mul(gf, c, &lead_inv)).collect();
    let den: Vec<Vec<u64>> = den.iter().map(|c| gf_mul(gf, c, &lead_inv)).collect();
    (gfpoly_trim(num), den)
}

// ---------------------------------------------------------------------------
// Scalar arithmetic
// ---------------------------------------------------------------------------

impl RingScalar {
    pub fn is_zero(&self) -> bool {
        *self == self.ring.zero()
    }

    pub fn is_one(&self) -> bool {
        *self == self.ring.one()
    }

    fn same_ring(&self, other: &RingScalar) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "{} vs {}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &RingScalar) -> Result<RingScalar> {
        self.same_ring(other)?;
        let repr = match (&self.repr, &other.repr) {
            (ScalarRepr::Int(a), ScalarRepr::Int(b)) => ScalarRepr::Int(a + b),
            (ScalarRepr::Residue(a), ScalarRepr::Residue(b)) => {
                let CoeffRing::ZMod(n) = self.ring else {
                    unreachable!()
                };
                ScalarRepr::Residue((a + b) % n)
            }
            (ScalarRepr::Poly(a), ScalarRepr::Poly(b)) => {
                let CoeffRing::Gf(gf) = &self.ring else {
                    unreachable!()
                };
                ScalarRepr::Poly(gf_add(gf, a, b))
            }
            (ScalarRepr::Fraction(an, ad), ScalarRepr::Fraction(bn, bd)) => {
                let CoeffRing::RatFun(gf) = &self.ring else {
                    unreachable!()
                };
                // a/b + c/d = (ad' + cb') / lcm via plain cross product then reduce
                let num = gfpoly_add(
                    gf,
                    &gfpoly_mul(gf, an, bd),
                    &gfpoly_mul(gf, bn, ad),
                );
                let den = gfpoly_mul(gf, ad, bd);
                let (num, den) = fraction_reduce(gf, num, den);
                ScalarRepr::Fraction(num, den)
            }
            _ => unreachable!("repr mismatch"),
        };
        Ok(RingScalar {
            ring: self.ring.clone(),
            repr,
        })
    }

    pub fn neg(&self) -> RingScalar {
        let repr = match &self.repr {
            ScalarRepr::Int(a) => ScalarRepr::Int(-a),
            ScalarRepr::Residue(a) => {
                let CoeffRing::ZMod(n) = self.ring else {
                    unreachable!()
                };
                ScalarRepr::Residue(if *a == 0 { 0 } else { n - a })
            }
            ScalarRepr::Poly(a) => {
                let CoeffRing::Gf(gf) = &self.ring else {
                    unreachable!()
                };
                ScalarRepr::Poly(gf_neg(gf, a))
            }
            ScalarRepr::Fraction(n, d) => {
                let CoeffRing::RatFun(gf) = &self.ring else {
                    unreachable!()
                };
                ScalarRepr::Fraction(gfpoly_neg(gf, n), d.clone())
            }
        };
        RingScalar {
            ring: self.ring.clone(),
            repr,
        }
    }

    pub fn sub(&self, other: &RingScalar) -> Result<RingScalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingScalar) -> Result<RingScalar> {
        self.same_ring(other)?;
        let repr = match (&self.repr, &other.repr) {
            (ScalarRepr::Int(a), ScalarRepr::Int(b)) => ScalarRepr::Int(a * b),
            (ScalarRepr::Residue(a), ScalarRepr::Residue(b)) => {
                let CoeffRing::ZMod(n) = self.ring else {
                    unreachable!()
                };
                ScalarRepr::Residue((a * b) % n)
            }
            (ScalarRepr::Poly(a), ScalarRepr::Poly(b)) => {
                let CoeffRing::Gf(gf) = &self.ring else {
                    unreachable!()
                };
                ScalarRepr::Poly(gf_mul(gf, a, b))
            }
            (ScalarRepr::Fraction(an, ad), ScalarRepr::Fraction(bn, bd)) => {
                let CoeffRing::RatFun(gf) = &self.ring else {
                    unreachable!()
                };
                let (num, den) = fraction_reduce(
                    gf,
                    gfpoly_mul(gf, an, bn),
                    gfpoly_mul(gf, ad, bd),
                );
                ScalarRepr::Fraction(num, den)
            }
            _ => unreachable!("repr mismatch"),
        };
        Ok(RingScalar {
            ring: self.ring.clone(),
            repr,
        })
    }

    /// Two-sided inverse in these commutative rings; `NotAUnit` otherwise.
    pub fn inv(&self) -> Result<RingScalar> {
        let repr = match &self.repr {
            ScalarRepr::Int(a) => {
                if a.abs() == BigInt::one() {
                    ScalarRepr::Int(a.clone())
                } else {
                    return Err(Error::NotAUnit);
                }
            }
            ScalarRepr::Residue(a) => {
                let CoeffRing::ZMod(n) = self.ring else {
                    unreachable!()
                };
                ScalarRepr::Residue(mod_inv_u64(*a, n).ok_or(Error::NotAUnit)?)
            }
            ScalarRepr::Poly(a) => {
                let CoeffRing::Gf(gf) = &self.ring else {
                    unreachable!()
                };
                ScalarRepr::Poly(gf_inv(gf, a).ok_or(Error::NotAUnit)?)
            }
            ScalarRepr::Fraction(n, d) => {
                let CoeffRing::RatFun(gf) = &self.ring else {
                    unreachable!()
                };
                if n.is_empty() {
                    return Err(Error::NotAUnit);
                }
                let (num, den) = fraction_reduce(gf, d.clone(), n.clone());
                ScalarRepr::Fraction(num, den)
            }
        };
        Ok(RingScalar {
            ring: self.ring.clone(),
            repr,
        })
    }
}

impl fmt::Display for RingScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            ScalarRepr::Int(a) => write!(f, "{a}"),
            ScalarRepr::Residue(a) => write!(f, "{a}"),
            ScalarRepr::Poly(a) => write!(f, "{}", fmt_gf_poly(a, "x")),
            ScalarRepr::Fraction(n, d) => {
                let ns = fmt_gfpoly(n, "t");
                if d.len() == 1 && d[0] == vec![1] {
                    write!(f, "{ns}")
                } else {
                    write!(f, "({ns})/({})", fmt_gfpoly(d, "t"))
                }
            }
        }
    }
}

fn fmt_gf_poly(a: &[u64], var: &str) -> String {
    if a.is_empty() {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for (i, &c) in a.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let t = match (i, c) {
            (0, c) => format!("{c}"),
            (1, 1) => var.to_string(),
            (1, c) => format!("{c}{var}"),
            (i, 1) => format!("{var}^{i}"),
            (i, c) => format!("{c}{var}^{i}"),
        };
        terms.push(t);
    }
    terms.join("+")
}

fn fmt_gfpoly(a: &[Vec<u64>], var: &str) -> String {
    if a.is_empty() {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for (i, c) in a.iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        let cs = fmt_gf_poly(c, "x");
        let needs_parens = cs.contains('+');
        let cs = if needs_parens { format!("({cs})") } else { cs };
        let t = match i {
            0 => cs,
            1 if cs == "1" => var.to_string(),
            1 => format!("{cs}{var}"),
            i if cs == "1" => format!("{var}^{i}"),
            i => format!("{cs}{var}^{i}"),
        };
        terms.push(t);
    }
    terms.join("+")
}

// ---------------------------------------------------------------------------
// Group rings
// ---------------------------------------------------------------------------

/// An element of R[Γ]: finitely supported map Γ→R in canonical form.
/// Support is sorted by the group's canonical element order and carries
/// no zero coefficients; empty support is the zero element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingElement {
    ring: CoeffRing,
    group: Group,
    support: Vec<(GroupElement, RingScalar)>,
}

impl GroupRingElement {
    /// Builds an element, normalizing: merges duplicate support points,
    /// strips zero coefficients, sorts canonically.
    pub fn new(
        ring: CoeffRing,
        group: Group,
        terms: Vec<(GroupElement, RingScalar)>,
    ) -> Result<GroupRingElement> {
        let mut merged: Vec<(GroupElement, RingScalar)> = Vec::new();
        for (g, c) in terms {
            if *g.group() != group {
                return Err(Error::GroupMismatch);
            }
            if c.ring != ring {
                return Err(Error::RingMismatch(format!("{} vs {}", c.ring, ring)));
            }
            match merged.binary_search_by(|(h, _)| h.canonical_cmp(&g)) {
                Ok(i) => {
                    let sum = merged[i].1.add(&c)?;
                    merged[i].1 = sum;
                }
                Err(i) => merged.insert(i, (g, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Ok(GroupRingElement {
            ring,
            group,
            support: merged,
        })
    }

    pub fn zero(ring: CoeffRing, group: Group) -> GroupRingElement {
        GroupRingElement {
            ring,
            group,
            support: vec![],
        }
    }

    pub fn one(ring: CoeffRing, group: Group) -> GroupRingElement {
        let id = group.identity();
        let c = ring.one();
        GroupRingElement {
            ring,
            group,
            support: vec![(id, c)],
        }
    }

    /// Single term c·g.
    pub fn term(ring: CoeffRing, g: GroupElement, c: RingScalar) -> Result<GroupRingElement> {
        let group = g.group().clone();
        GroupRingElement::new(ring, group, vec![(g, c)])
    }

    /// The scalar c·1_Γ.
    pub fn scalar(ring: CoeffRing, group: Group, c: RingScalar) -> Result<GroupRingElement> {
        let id = group.identity();
        GroupRingElement::new(ring, group, vec![(id, c)])
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn support(&self) -> &[(GroupElement, RingScalar)] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.support.len() == 1 && self.support[0].0.is_identity() && self.support[0].1.is_one()
    }

    pub fn coefficient(&self, g: &GroupElement) -> RingScalar {
        match self.support.binary_search_by(|(h, _)| h.canonical_cmp(g)) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => self.ring.zero(),
        }
    }

    fn same_ambient(&self, other: &GroupRingElement) -> Result<()> {
        if self.ring != other.ring || self.group != other.group {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GroupRingElement) -> Result<GroupRingElement> {
        self.same_ambient(other)?;
        let mut terms = self.support.clone();
        terms.extend(other.support.iter().cloned());
        GroupRingElement::new(self.ring.clone(), self.group.clone(), terms)
    }

    pub fn neg(&self) -> GroupRingElement {
        GroupRingElement {
            ring: self.ring.clone(),
            group: self.group.clone(),
            support: self
                .support
                .iter()
                .map(|(g, c)| (g.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &GroupRingElement) -> Result<GroupRingElement> {
        self.add(&other.neg())
    }

    /// Convolution: (a·b)(g) = Σ_{xy=g} a(x)b(y).
    pub fn mul(&self, other: &GroupRingElement) -> Result<GroupRingElement> {
        self.same_ambient(other)?;
        let mut terms = Vec::with_capacity(self.support.len() * other.support.len());
        for (x, a) in &self.support {
            for (y, b) in &other.support {
                terms.push((self.group.mul(x, y)?, a.mul(b)?));
            }
        }
        GroupRingElement::new(self.ring.clone(), self.group.clone(), terms)
    }

    pub fn scale(&self, c: &RingScalar) -> Result<GroupRingElement> {
        let terms = self
            .support
            .iter()
            .map(|(g, a)| Ok((g.clone(), a.mul(c)?)))
            .collect::<Result<Vec<_>>>()?;
        GroupRingElement::new(self.ring.clone(), self.group.clone(), terms)
    }

    /// Augmentation: the sum of all coefficients.
    pub fn augmentation(&self) -> RingScalar {
        let mut acc = self.ring.zero();
        for (_, c) in &self.support {
            acc = acc.add(c).expect("same ring");
        }
        acc
    }

    /// Pushforward along h: (φ*f)(x) = Σ_{y∈φ⁻¹(x)∩supp f} f(y), computed
    /// by pushing each support point through h.
    pub fn pushforward(&self, h: &GroupHom) -> Result<GroupRingElement> {
        if *h.source() != self.group {
            return Err(Error::Mismatch);
        }
        let terms = self
            .support
            .iter()
            .map(|(g, c)| Ok((h.apply(g)?, c.clone())))
            .collect::<Result<Vec<_>>>()?;
        GroupRingElement::new(self.ring.clone(), h.target().clone(), terms)
    }

    /// Coefficientwise reduction Z[Γ] -> (Z/mZ)[Γ].
    pub fn coeff_reduce(&self, m: u64) -> Result<GroupRingElement> {
        if self.ring != CoeffRing::Integers {
            return Err(Error::RingMismatch(
                "coeff_reduce needs integer coefficients".into(),
            ));
        }
        assert!(m >= 2);
        let target = CoeffRing::z_mod(m);
        let terms = self
            .support
            .iter()
            .map(|(g, c)| {
                let ScalarRepr::Int(v) = &c.repr else {
                    unreachable!()
                };
                let r: u64 = v.mod_floor(&BigInt::from(m)).try_into().expect("residue");
                (g.clone(), target.from_int(r as i64))
            })
            .collect();
        GroupRingElement::new(target, self.group.clone(), terms)
    }

    /// Coefficientwise lift (Z/mZ)[Γ] -> Z[Γ] with representatives in [0, m).
    pub fn coeff_lift(&self) -> Result<GroupRingElement> {
        let CoeffRing::ZMod(_) = self.ring else {
            return Err(Error::RingMismatch("coeff_lift needs Z/m coefficients".into()));
        };
        let target = CoeffRing::Integers;
        let terms = self
            .support
            .iter()
            .map(|(g, c)| {
                let ScalarRepr::Residue(r) = &c.repr else {
                    unreachable!()
                };
                (g.clone(), target.from_int(*r as i64))
            })
            .collect();
        GroupRingElement::new(target, self.group.clone(), terms)
    }

    /// Lift F_p[Γ] -> Z[Γ] with representatives in [0, p); only for
    /// prime fields (k = 1).
    pub fn coeff_lift_gf(&self) -> Result<GroupRingElement> {
        let CoeffRing::Gf(gf) = &self.ring else {
            return Err(Error::RingMismatch("coeff_lift_gf needs gf coefficients".into()));
        };
        if gf.k != 1 {
            return Err(Error::Unsupported("lift only from prime fields".into()));
        }
        let target = CoeffRing::Integers;
        let terms = self
            .support
            .iter()
            .map(|(g, c)| {
                let ScalarRepr::Poly(v) = &c.repr else {
                    unreachable!()
                };
                let r = v.first().copied().unwrap_or(0);
                (g.clone(), target.from_int(r as i64))
            })
            .collect();
        GroupRingElement::new(target, self.group.clone(), terms)
    }

    /// Reduction Z[Γ] -> F_p[Γ] (prime field).
    pub fn coeff_reduce_gf(&self, p: u64) -> Result<GroupRingElement> {
        if self.ring != CoeffRing::Integers {
            return Err(Error::RingMismatch(
                "coeff_reduce_gf needs integer coefficients".into(),
            ));
        }
        let target = make_gf(p, 1)?;
        let terms = self
            .support
            .iter()
            .map(|(g, c)| {
                let ScalarRepr::Int(v) = &c.repr else {
                    unreachable!()
                };
                let r: u64 = v.mod_floor(&BigInt::from(p)).try_into().expect("residue");
                (g.clone(), target.from_int(r as i64))
            })
            .collect();
        GroupRingElement::new(target, self.group.clone(), terms)
    }

    /// All elements of a finite group ring (finite ring, finite group),
    /// in lexicographic coefficient order along the group enumeration.
    pub fn enumerate_all(ring: &CoeffRing, group: &Group) -> Result<Vec<GroupRingElement>> {
        let scalars = ring.enumerate()?;
        let elems = group.enumerate()?;
        let mut out = Vec::new();
        let mut indices = vec![0usize; elems.len()];
        loop {
            let terms: Vec<(GroupElement, RingScalar)> = elems
                .iter()
                .zip(&indices)
                .map(|(g, &i)| (g.clone(), scalars[i].clone()))
                .collect();
            out.push(GroupRingElement::new(
                ring.clone(),
                group.clone(),
                terms,
            )?);
            // Odometer increment.
            let mut pos = 0;
            loop {
                if pos == indices.len() {
                    return Ok(out);
                }
                indices[pos] += 1;
                if indices[pos] < scalars.len() {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn random(
        ring: &CoeffRing,
        group: &Group,
        max_terms: usize,
        rng: &mut SplitMix64,
    ) -> GroupRingElement {
        let n = rng.below(max_terms as u64 + 1) as usize;
        let terms: Vec<(GroupElement, RingScalar)> = (0..n)
            .map(|_| (group.random_element(rng), ring.random_scalar(rng)))
            .collect();
        GroupRingElement::new(ring.clone(), group.clone(), terms).expect("consistent")
    }
}

/// Cyclic-group monomial spelling, matching the element grammar the
/// CLI parses back: `x` for the infinite cyclic generator, `g` for a
/// finite cyclic one.
fn cyclic_monomial(g: &GroupElement) -> Option<String> {
    use crate::groups::GroupSpec;
    use crate::groups::Payload;
    match (g.group().spec(), g.payload()) {
        (GroupSpec::Cyclic(0), Payload::Int(k)) => Some(if *k == BigInt::one() {
            "x".to_string()
        } else {
            format!("x^{k}")
        }),
        (GroupSpec::Cyclic(n), Payload::Residue(r)) if *n >= 2 => Some(if *r == 1 {
            "g".to_string()
        } else {
            format!("g^{r}")
        }),
        _ => None,
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if g.is_identity() {
                write!(f, "{c}")?;
                continue;
            }
            let mono = match cyclic_monomial(g) {
                Some(m) => m,
                None => format!("[{g}]"),
            };
            if c.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{c}*{mono}")?;
            }
        }
        Ok(())
    }
}
