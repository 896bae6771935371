//! Additive and linear cellular automata over catalogue groups.
//!
//! An additive CA over Γ with finite abelian alphabet A is given by a
//! finite memory {(s, M_s)}: τ(c)(g) = Σ_s c(g·s)·M_s, where alphabet
//! elements are row tuples of residues on a fixed generator basis and
//! the M_s are integer matrices acting on the right. The right-action
//! convention mirrors right multiplication by group-ring elements, so
//! the matrix↔CA translation is an exact round trip on vector-space
//! alphabets. Kernels and images over finite Γ are computed exactly,
//! by brute force below a budget and by Smith-style elimination on the
//! relation lattice above it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, Payload};
use crate::matrices::{is_unit_exhaustive, RingMatrix};
use crate::rings::{make_gf, CoeffRing, GroupRingElement, RingScalar, ScalarRepr};
use crate::rng::SplitMix64;

/// Brute-force configuration budget: above this, kernels are computed by
/// lattice elimination instead of enumeration.
pub const BRUTE_FORCE_CONFIG_CAP: u64 = 1 << 20;

// ---------------------------------------------------------------------------
// Alphabets
// ---------------------------------------------------------------------------

/// A finite abelian alphabet A = ⊕ (Z/p^eZ)^d with an optional
/// vector-space tag for the linear case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    /// (prime, exponent, multiplicity), sorted by (prime, exponent).
    structure: Vec<(u64, u32, usize)>,
    vector_space: Option<(u64, usize)>,
}

impl Alphabet {
    pub fn new(structure: Vec<(u64, u32, usize)>) -> Result<Alphabet> {
        if structure.is_empty() {
            return Err(Error::Unsupported("empty alphabet".into()));
        }
        for w in structure.windows(2) {
            if (w[0].0, w[0].1) >= (w[1].0, w[1].1) {
                return Err(Error::Unsupported(
                    "alphabet structure must be sorted by (prime, exponent)".into(),
                ));
            }
        }
        if structure.iter().any(|&(_, e, d)| e == 0 || d == 0) {
            return Err(Error::Unsupported(
                "alphabet multiplicities and exponents must be positive".into(),
            ));
        }
        let vector_space = match structure.as_slice() {
            [(p, 1, d)] => Some((*p, *d)),
            _ => None,
        };
        Ok(Alphabet {
            structure,
            vector_space,
        })
    }

    /// The vector space F_p^d.
    pub fn vector_space(p: u64, d: usize) -> Result<Alphabet> {
        Alphabet::new(vec![(p, 1, d)])
    }

    /// Z/nZ via its primary decomposition.
    pub fn cyclic(n: u64) -> Result<Alphabet> {
        assert!(n >= 2);
        let mut structure = Vec::new();
        let mut rem = n;
        let mut p = 2;
        while rem > 1 {
            if rem % p == 0 {
                let mut e = 0;
                while rem % p == 0 {
                    rem /= p;
                    e += 1;
                }
                structure.push((p, e, 1));
            }
            p += 1;
        }
        Alphabet::new(structure)
    }

    pub fn structure(&self) -> &[(u64, u32, usize)] {
        &self.structure
    }

    pub fn vector_space_tag(&self) -> Option<(u64, usize)> {
        self.vector_space
    }

    /// Flattened generator orders p^e.
    pub fn generator_orders(&self) -> Vec<u64> {
        self.structure
            .iter()
            .flat_map(|&(p, e, d)| std::iter::repeat_n(p.pow(e), d))
            .collect()
    }

    /// The prime of each generator.
    pub fn generator_primes(&self) -> Vec<u64> {
        self.structure
            .iter()
            .flat_map(|&(p, _, d)| std::iter::repeat_n(p, d))
            .collect()
    }

    pub fn num_generators(&self) -> usize {
        self.structure.iter().map(|&(_, _, d)| d).sum()
    }

    pub fn size(&self) -> u64 {
        self.generator_orders().iter().product()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.num_generators()]
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.generator_orders()
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&m, (&x, &y))| (x + y) % m)
            .collect()
    }

    pub fn enumerate(&self) -> Vec<Vec<u64>> {
        let orders = self.generator_orders();
        let mut out = Vec::with_capacity(self.size() as usize);
        let mut v = self.zero();
        loop {
            out.push(v.clone());
            let mut pos = 0;
            loop {
                if pos == v.len() {
                    return out;
                }
                v[pos] += 1;
                if v[pos] < orders[pos] {
                    break;
                }
                v[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Required divisor for an endomorphism matrix entry from generator i
    /// into generator j: p_j^{e_j} / gcd(p_j^{e_j}, p_i^{e_i}).
    pub fn entry_divisor(&self, i: usize, j: usize) -> u64 {
        let orders = self.generator_orders();
        orders[j] / gcd_u64(orders[j], orders[i])
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Automata
// ---------------------------------------------------------------------------

/// An additive cellular automaton: memory sites with integer matrices
/// acting on generator coordinates (row action).
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveCA {
    group: Group,
    alphabet: Alphabet,
    memory: Vec<(GroupElement, Vec<Vec<u64>>)>,
}

impl AdditiveCA {
    /// Builds a CA, merging duplicate memory sites by matrix addition and
    /// checking the order-congruence conditions on every entry.
    pub fn new(
        group: Group,
        alphabet: Alphabet,
        memory: Vec<(GroupElement, Vec<Vec<i64>>)>,
    ) -> Result<AdditiveCA> {
        let t = alphabet.num_generators();
        let orders = alphabet.generator_orders();
        let mut merged: Vec<(GroupElement, Vec<Vec<u64>>)> = Vec::new();
        for (site, m) in memory {
            if *site.group() != group {
                return Err(Error::GroupMismatch);
            }
            if m.len() != t || m.iter().any(|row| row.len() != t) {
                return Err(Error::ShapeMismatch(format!("memory matrices must be {t}x{t}")));
            }
            let canon: Vec<Vec<u64>> = m
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &v)| v.rem_euclid(orders[j] as i64) as u64)
                        .collect()
                })
                .collect();
            match merged.binary_search_by(|(q, _)| q.canonical_cmp(&site)) {
                Ok(k) => {
                    for i in 0..t {
                        for j in 0..t {
                            merged[k].1[i][j] = (merged[k].1[i][j] + canon[i][j]) % orders[j];
                        }
                    }
                }
                Err(k) => merged.insert(k, (site, canon)),
            }
        }
        // Drop zero matrices; then validate congruences.
        merged.retain(|(_, m)| m.iter().any(|row| row.iter().any(|&v| v != 0)));
        for (_, m) in &merged {
            for i in 0..t {
                for j in 0..t {
                    let q = alphabet.entry_divisor(i, j);
                    if m[i][j] % q != 0 {
                        return Err(Error::InvalidAlphabetEndo(i, j));
                    }
                }
            }
        }
        Ok(AdditiveCA {
            group,
            alphabet,
            memory: merged,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn memory(&self) -> &[(GroupElement, Vec<Vec<u64>>)] {
        &self.memory
    }

    pub fn memory_display(&self) -> String {
        let parts: Vec<String> = self
            .memory
            .iter()
            .map(|(s, m)| format!("({s},{m:?})"))
            .collect();
        format!("[{}]", parts.join(","))
    }
}

/// A total configuration Γ→A over a finite group, values indexed along
/// the canonical enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    group: Group,
    values: Vec<Vec<u64>>,
}

impl Configuration {
    pub fn new(group: Group, values: Vec<Vec<u64>>) -> Result<Configuration> {
        let order = group.order().ok_or(Error::InfiniteGroup)? as usize;
        if values.len() != order {
            return Err(Error::ShapeMismatch("configuration must be total".into()));
        }
        Ok(Configuration { group, values })
    }

    pub fn values(&self) -> &[Vec<u64>] {
        &self.values
    }

    pub fn zero(group: Group, alphabet: &Alphabet) -> Result<Configuration> {
        let order = group.order().ok_or(Error::InfiniteGroup)? as usize;
        Ok(Configuration {
            group,
            values: vec![alphabet.zero(); order],
        })
    }

    /// The shifted configuration g·c with (g·c)(x) = c(g⁻¹x).
    pub fn shift(&self, g: &GroupElement) -> Result<Configuration> {
        let elems = self.group.enumerate()?;
        let index: BTreeMap<Payload, usize> = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.payload().clone(), i))
            .collect();
        let ginv = self.group.inv(g)?;
        let values = elems
            .iter()
            .map(|x| {
                let src = self.group.mul(&ginv, x)?;
                Ok(self.values[index[src.payload()]].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration {
            group: self.group.clone(),
            values,
        })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.values)
    }
}

/// τ(c)(g) = Σ_s c(g·s)·M_s over a finite group.
pub fn apply_ca(ca: &AdditiveCA, c: &Configuration) -> Result<Configuration> {
    if c.group != ca.group {
        return Err(Error::GroupMismatch);
    }
    let elems = ca.group.enumerate()?;
    let index: BTreeMap<Payload, usize> = elems
        .iter()
        .enumerate()
        .map(|(i, e)| (e.payload().clone(), i))
        .collect();
    let orders = ca.alphabet.generator_orders();
    let t = ca.alphabet.num_generators();
    let mut out = Vec::with_capacity(elems.len());
    for g in &elems {
        let mut acc = vec![0u64; t];
        for (s, m) in &ca.memory {
            let src = &c.values[index[ca.group.mul(g, s)?.payload()]];
            for j in 0..t {
                let mut v = acc[j];
                for i in 0..t {
                    v = (v + src[i] * m[i][j]) % orders[j];
                }
                acc[j] = v;
            }
        }
        out.push(acc);
    }
    Configuration::new(ca.group.clone(), out)
}

/// Windowed evaluation over Z^r with zero extension outside the window.
/// The boundary breaks equivariance; results are labelled bounded.
pub fn apply_ca_windowed(
    ca: &AdditiveCA,
    window_values: &BTreeMap<Payload, Vec<u64>>,
    window: i64,
) -> Result<(BTreeMap<Payload, Vec<u64>>, bool)> {
    if ca.group.is_finite() {
        return Err(Error::Unsupported(
            "windowed evaluation is for infinite groups".into(),
        ));
    }
    let sites = crate::matrices::window_elements(&ca.group, window)?;
    let orders = ca.alphabet.generator_orders();
    let t = ca.alphabet.num_generators();
    let zero = ca.alphabet.zero();
    let mut out = BTreeMap::new();
    for g in &sites {
        let mut acc = vec![0u64; t];
        for (s, m) in &ca.memory {
            let p = ca.group.mul(g, s)?;
            let src = window_values.get(p.payload()).unwrap_or(&zero);
            for j in 0..t {
                for i in 0..t {
                    acc[j] = (acc[j] + src[i] * m[i][j]) % orders[j];
                }
            }
        }
        out.insert(g.payload().clone(), acc);
    }
    Ok((out, true))
}

// ---------------------------------------------------------------------------
// Kernel and image
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaAnalysis {
    pub total_configs: BigInt,
    pub kernel_order: BigInt,
    pub image_order: BigInt,
    pub injective: bool,
    pub surjective: bool,
}

/// Exact kernel/image of the induced endomorphism of A^Γ for finite Γ:
/// brute force below the budget, lattice elimination above.
pub fn ca_kernel_image(ca: &AdditiveCA, budget: u64) -> Result<CaAnalysis> {
    let order = ca.group.order().ok_or(Error::InfiniteGroup)? as u32;
    let total = BigInt::from(ca.alphabet.size()).pow(order);
    if total <= BigInt::from(budget.min(BRUTE_FORCE_CONFIG_CAP)) {
        ca_kernel_image_brute(ca)
    } else {
        ca_kernel_image_lattice(ca)
    }
}

/// Brute-force oracle: enumerates every configuration.
pub fn ca_kernel_image_brute(ca: &AdditiveCA) -> Result<CaAnalysis> {
    let order = ca.group.order().ok_or(Error::InfiniteGroup)? as usize;
    let letters = ca.alphabet.enumerate();
    let mut kernel = BigInt::zero();
    let mut image: BTreeSet<Vec<Vec<u64>>> = BTreeSet::new();
    let mut idx = vec![0usize; order];
    let mut total = BigInt::zero();
    loop {
        let values: Vec<Vec<u64>> = idx.iter().map(|&i| letters[i].clone()).collect();
        let c = Configuration::new(ca.group.clone(), values)?;
        let out = apply_ca(ca, &c)?;
        total += 1;
        if out.values.iter().all(|v| v.iter().all(|&x| x == 0)) {
            kernel += 1;
        }
        image.insert(out.values);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let image_order = BigInt::from(image.len());
                let injective = kernel.is_one();
                let surjective = image_order == total;
                return Ok(CaAnalysis {
                    total_configs: total,
                    kernel_order: kernel,
                    image_order,
                    injective,
                    surjective,
                });
            }
            idx[pos] += 1;
            if idx[pos] < letters.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Structure-based path: the kernel order equals the cokernel size of
/// the stacked lattice [T; diag(orders)] where T is the integer matrix
/// of the CA on the coordinates (site, generator).
fn ca_kernel_image_lattice(ca: &AdditiveCA) -> Result<CaAnalysis> {
    let elems = ca.group.enumerate()?;
    let index: BTreeMap<Payload, usize> = elems
        .iter()
        .enumerate()
        .map(|(i, e)| (e.payload().clone(), i))
        .collect();
    let t = ca.alphabet.num_generators();
    let orders = ca.alphabet.generator_orders();
    let n = elems.len() * t;
    let coord = |site: usize, gen: usize| site * t + gen;
    let mut tmat = vec![vec![BigInt::zero(); n]; n];
    // Source coordinate (h, i) feeds target (g, j) when h = g·s.
    for (gi, g) in elems.iter().enumerate() {
        for (s, m) in &ca.memory {
            let h = index[ca.group.mul(g, s)?.payload()];
            for i in 0..t {
                for j in 0..t {
                    if m[i][j] != 0 {
                        tmat[coord(h, i)][coord(gi, j)] += BigInt::from(m[i][j]);
                    }
                }
            }
        }
    }
    // Stack the order relations.
    for (gi, _) in elems.iter().enumerate() {
        for j in 0..t {
            let mut row = vec![BigInt::zero(); n];
            row[coord(gi, j)] = BigInt::from(orders[j]);
            tmat.push(row);
        }
    }
    let diag = smith_diagonal(tmat);
    let mut coker = BigInt::one();
    for d in &diag {
        if !d.is_zero() {
            coker *= d.abs();
        }
    }
    let total = BigInt::from(ca.alphabet.size()).pow(elems.len() as u32);
    let kernel = coker;
    let image = &total / &kernel;
    let injective = kernel.is_one();
    Ok(CaAnalysis {
        total_configs: total.clone(),
        kernel_order: kernel,
        surjective: image == total,
        image_order: image,
        injective,
    })
}

/// Diagonal of a Smith-style elimination over Z (unimodular row/column
/// operations only; the product of nonzero entries is the cokernel size).
pub(crate) fn smith_diagonal(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut r0 = 0;
    let mut c0 = 0;
    while r0 < rows && c0 < cols {
        // Find the entry of least nonzero absolute value in the submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for r in r0..rows {
            for c in c0..cols {
                if !m[r][c].is_zero()
                    && pivot
                        .map(|(pr, pc)| m[r][c].abs() < m[pr][pc].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pivot else {
            break;
        };
        m.swap(r0, pr);
        for row in m.iter_mut() {
            row.swap(c0, pc);
        }
        // Reduce the pivot row and column; repeat until clean.
        let mut clean = false;
        while !clean {
            clean = true;
            for r in r0 + 1..rows {
                if !m[r][c0].is_zero() {
                    let q = div_nearest(&m[r][c0], &m[r0][c0]);
                    for c in c0..cols {
                        let sub = &q * &m[r0][c];
                        m[r][c] -= sub;
                    }
                    if !m[r][c0].is_zero() {
                        m.swap(r0, r);
                        clean = false;
                    }
                }
            }
            for c in c0 + 1..cols {
                if !m[r0][c].is_zero() {
                    let q = div_nearest(&m[r0][c], &m[r0][c0]);
                    if !q.is_zero() {
                        for r in r0..rows {
                            let sub = &q * &m[r][c0];
                            m[r][c] -= sub;
                        }
                    }
                    if !m[r0][c].is_zero() {
                        for row in m.iter_mut() {
                            row.swap(c0, c);
                        }
                        clean = false;
                    }
                }
            }
        }
        diag.push(m[r0][c0].clone());
        r0 += 1;
        c0 += 1;
    }
    diag
}

fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    // Round-to-nearest quotient keeps remainders small.
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if &r.abs() * &two > b.abs() {
        if r.sign() == b.sign() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

// ---------------------------------------------------------------------------
// Matrix ↔ CA correspondence
// ---------------------------------------------------------------------------

/// The CA of a matrix Y over F_p[Γ]: memory = union of entry supports,
/// M_s[i][j] = the coefficient of s in Y_{ij}.
pub fn ca_from_matrix(y: &RingMatrix) -> Result<AdditiveCA> {
    let CoeffRing::Gf(gf) = y.ring() else {
        return Err(Error::NotLinearAlphabet);
    };
    if gf.k != 1 {
        return Err(Error::NotLinearAlphabet);
    }
    let p = gf.p;
    let d = y.dim();
    let alphabet = Alphabet::vector_space(p, d)?;
    let mut sites: BTreeSet<Payload> = BTreeSet::new();
    for e in y.entries() {
        for (g, _) in e.support() {
            sites.insert(g.payload().clone());
        }
    }
    let mut memory = Vec::new();
    for s in sites {
        let site = y.group().element(s)?;
        let mut m = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                let c = y.entry(i, j).coefficient(&site);
                let ScalarRepr::Poly(v) = &c.repr else {
                    unreachable!("gf coefficients")
                };
                m[i][j] = v.first().copied().unwrap_or(0) as i64;
            }
        }
        memory.push((site, m));
    }
    AdditiveCA::new(y.group().clone(), alphabet, memory)
}

/// Inverse translation for vector-space alphabets.
pub fn matrix_from_ca(ca: &AdditiveCA) -> Result<RingMatrix> {
    let Some((p, d)) = ca.alphabet.vector_space_tag() else {
        return Err(Error::NotLinearAlphabet);
    };
    let ring = make_gf(p, 1)?;
    let group = ca.group.clone();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let terms: Vec<(GroupElement, RingScalar)> = ca
                .memory
                .iter()
                .filter(|(_, m)| m[i][j] != 0)
                .map(|(s, m)| (s.clone(), ring.from_int(m[i][j] as i64)))
                .collect();
            entries.push(GroupRingElement::new(ring.clone(), group.clone(), terms)?);
        }
    }
    RingMatrix::new(ring, group, d, entries)
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub prime: u64,
    pub kernel_order: BigInt,
    pub injective: bool,
    /// Kernel of the restriction to the p-torsion subgroup Q.
    pub restriction_kernel: BigInt,
    /// Kernel of the induced CA on A/Q, when A/Q is nontrivial.
    pub quotient_kernel: Option<BigInt>,
    /// The Q-restriction is a linear CA over F_p.
    pub restriction_is_linear: bool,
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub whole_kernel: BigInt,
    pub components: Vec<ComponentReport>,
    /// |ker(whole)| = Π_p |ker(p-component)|.
    pub kernel_product_identity: bool,
    /// Injectivity of the whole implies injectivity of every restriction
    /// and quotient (vacuously true when the whole is not injective).
    pub injectivity_inherited: bool,
}

/// Splits a CA over a general finite abelian alphabet into its
/// p-components, and within each the p-torsion restriction and the A/Q
/// quotient; verifies the kernel identities on the finite instance.
pub fn decompose_ca(ca: &AdditiveCA, budget: u64) -> Result<DecompositionReport> {
    let whole = ca_kernel_image(ca, budget)?;
    let primes: BTreeSet<u64> = ca.alphabet.structure().iter().map(|&(p, _, _)| p).collect();
    let gen_primes = ca.alphabet.generator_primes();
    let mut components = Vec::new();
    let mut product = BigInt::one();
    let mut inherited = true;
    for p in primes {
        let indices: Vec<usize> = gen_primes
            .iter()
            .enumerate()
            .filter(|(_, &q)| q == p)
            .map(|(i, _)| i)
            .collect();
        let structure: Vec<(u64, u32, usize)> = ca
            .alphabet
            .structure()
            .iter()
            .filter(|&&(q, _, _)| q == p)
            .copied()
            .collect();
        let comp_alphabet = Alphabet::new(structure.clone())?;
        // Cross-prime blocks are zero by the congruence conditions, so
        // restricting rows and columns is an exact splitting.
        let comp_memory: Vec<(GroupElement, Vec<Vec<i64>>)> = ca
            .memory
            .iter()
            .map(|(s, m)| {
                let sub: Vec<Vec<i64>> = indices
                    .iter()
                    .map(|&i| indices.iter().map(|&j| m[i][j] as i64).collect())
                    .collect();
                (s.clone(), sub)
            })
            .collect();
        let comp = AdditiveCA::new(ca.group.clone(), comp_alphabet.clone(), comp_memory)?;
        let comp_analysis = ca_kernel_image(&comp, budget)?;
        product *= &comp_analysis.kernel_order;

        // Q-restriction: coordinates scaled by p^{e-1}; a linear CA on F_p^t.
        let orders = comp_alphabet.generator_orders();
        let t = orders.len();
        let q_alphabet = Alphabet::vector_space(p, t)?;
        let q_memory: Vec<(GroupElement, Vec<Vec<i64>>)> = comp
            .memory
            .iter()
            .map(|(s, m)| {
                let sub: Vec<Vec<i64>> = (0..t)
                    .map(|i| {
                        (0..t)
                            .map(|j| {
                                let scaled = (orders[i] / p) as u128 * m[i][j] as u128;
                                ((scaled % orders[j] as u128) as u64 / (orders[j] / p)) as i64
                            })
                            .collect()
                    })
                    .collect();
                (s.clone(), sub)
            })
            .collect();
        let q_ca = AdditiveCA::new(ca.group.clone(), q_alphabet, q_memory)?;
        let q_analysis = ca_kernel_image(&q_ca, budget)?;

        // Quotient on A/Q: exponents drop by one; exponent-1 parts vanish.
        let quot_structure: Vec<(u64, u32, usize)> = structure
            .iter()
            .filter(|&&(_, e, _)| e >= 2)
            .map(|&(q, e, d)| (q, e - 1, d))
            .collect();
        let quotient_kernel = if quot_structure.is_empty() {
            None
        } else {
            let keep: Vec<usize> = comp_alphabet
                .generator_orders()
                .iter()
                .enumerate()
                .filter(|(_, &o)| o > p)
                .map(|(i, _)| i)
                .collect();
            let quot_alphabet = Alphabet::new(quot_structure)?;
            let quot_orders = quot_alphabet.generator_orders();
            let quot_memory: Vec<(GroupElement, Vec<Vec<i64>>)> = comp
                .memory
                .iter()
                .map(|(s, m)| {
                    let sub: Vec<Vec<i64>> = keep
                        .iter()
                        .map(|&i| {
                            keep.iter()
                                .enumerate()
                                .map(|(j_pos, &j)| (m[i][j] % quot_orders[j_pos]) as i64)
                                .collect()
                        })
                        .collect();
                    (s.clone(), sub)
                })
                .collect();
            let quot_ca = AdditiveCA::new(ca.group.clone(), quot_alphabet, quot_memory)?;
            Some(ca_kernel_image(&quot_ca, budget)?.kernel_order)
        };
        if comp_analysis.injective {
            if !q_analysis.injective {
                inherited = false;
            }
            if let Some(qk) = &quotient_kernel {
                if !qk.is_one() {
                    inherited = false;
                }
            }
        }
        components.push(ComponentReport {
            prime: p,
            kernel_order: comp_analysis.kernel_order,
            injective: comp_analysis.injective,
            restriction_kernel: q_analysis.kernel_order,
            quotient_kernel,
            restriction_is_linear: true,
        });
    }
    Ok(DecompositionReport {
        kernel_product_identity: product == whole.kernel_order,
        whole_kernel: whole.kernel_order,
        components,
        injectivity_inherited: inherited,
    })
}

// ---------------------------------------------------------------------------
// Surjunctivity sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CaRecord {
    pub memory: String,
    pub injective: bool,
    pub surjective: bool,
    pub kernel_order: BigInt,
}

#[derive(Debug, Clone)]
pub struct SurjunctivityReport {
    pub cas_checked: u64,
    pub bijective_count: u64,
    /// Injective-but-not-surjective CAs (must be empty on finite Γ; any
    /// entry is a software fault).
    pub violations: Vec<String>,
    /// Mismatches between CA bijectivity and matrix unit-ness on
    /// vector-space alphabets.
    pub csc_mismatches: Vec<String>,
    pub exhaustive: bool,
    pub records: Vec<CaRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepScope {
    ExhaustiveUpToBudget,
    Sample { count: u64, seed: u64 },
}

/// All valid endomorphism matrices of the alphabet, odometer order.
fn valid_matrices(alphabet: &Alphabet) -> Vec<Vec<Vec<u64>>> {
    let t = alphabet.num_generators();
    let orders = alphabet.generator_orders();
    let positions: Vec<(usize, usize, u64, u64)> = (0..t)
        .flat_map(|i| (0..t).map(move |j| (i, j)))
        .map(|(i, j)| {
            let q = alphabet.entry_divisor(i, j);
            (i, j, q, orders[j] / q)
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0u64; positions.len()];
    loop {
        let mut m = vec![vec![0u64; t]; t];
        for (k, &(i, j, q, _)) in positions.iter().enumerate() {
            m[i][j] = idx[k] * q;
        }
        out.push(m);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < positions[pos].3 {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Sweeps additive CAs over a finite group, asserting injective ⇒
/// surjective for each, and cross-checking bijectivity against unit-ness
/// of the corresponding matrix on vector-space alphabets.
pub fn surjunctivity_report(
    group: &Group,
    alphabet: &Alphabet,
    scope: SweepScope,
    budget: u64,
) -> Result<SurjunctivityReport> {
    let sites = group.enumerate()?;
    let mats = valid_matrices(alphabet);
    let is_linear = alphabet.vector_space_tag().is_some();
    let mut report = SurjunctivityReport {
        cas_checked: 0,
        bijective_count: 0,
        violations: vec![],
        csc_mismatches: vec![],
        exhaustive: false,
        records: vec![],
    };
    let mut check_one = |memory: Vec<(GroupElement, Vec<Vec<i64>>)>| -> Result<()> {
        let ca = AdditiveCA::new(group.clone(), alphabet.clone(), memory)?;
        let analysis = ca_kernel_image(&ca, budget)?;
        report.cas_checked += 1;
        if analysis.injective && analysis.surjective {
            report.bijective_count += 1;
        }
        if analysis.injective && !analysis.surjective {
            report.violations.push(ca.memory_display());
        }
        if is_linear {
            let y = matrix_from_ca(&ca)?;
            let unit = if y.dim() == 1 {
                is_unit_exhaustive(y.entry(0, 0))?
            } else {
                matrix_is_unit_exhaustive(&y)?
            };
            let bij = analysis.injective && analysis.surjective;
            if unit != bij {
                report.csc_mismatches.push(ca.memory_display());
            }
        }
        report.records.push(CaRecord {
            memory: ca.memory_display(),
            injective: analysis.injective,
            surjective: analysis.surjective,
            kernel_order: analysis.kernel_order,
        });
        Ok(())
    };
    match scope {
        SweepScope::ExhaustiveUpToBudget => {
            let total = (mats.len() as u64)
                .checked_pow(sites.len() as u32)
                .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
            if total > budget {
                return Err(Error::BudgetExceeded { needed: total, budget });
            }
            let mut idx = vec![0usize; sites.len()];
            'outer: loop {
                let memory: Vec<(GroupElement, Vec<Vec<i64>>)> = sites
                    .iter()
                    .zip(&idx)
                    .map(|(s, &k)| {
                        (
                            s.clone(),
                            mats[k]
                                .iter()
                                .map(|row| row.iter().map(|&v| v as i64).collect())
                                .collect(),
                        )
                    })
                    .collect();
                check_one(memory)?;
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break 'outer;
                    }
                    idx[pos] += 1;
                    if idx[pos] < mats.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
            report.exhaustive = true;
        }
        SweepScope::Sample { count, seed } => {
            let mut rng = SplitMix64::new(seed);
            for _ in 0..count.min(budget) {
                let memory: Vec<(GroupElement, Vec<Vec<i64>>)> = sites
                    .iter()
                    .map(|s| {
                        let k = rng.below(mats.len() as u64) as usize;
                        (
                            s.clone(),
                            mats[k]
                                .iter()
                                .map(|row| row.iter().map(|&v| v as i64).collect())
                                .collect(),
                        )
                    })
                    .collect();
                check_one(memory)?;
            }
        }
    }
    Ok(report)
}

/// Unit-ness of a matrix over a finite group ring by exhaustive search
/// over candidate inverses.
pub fn matrix_is_unit_exhaustive(y: &RingMatrix) -> Result<bool> {
    let all = crate::matrices::enumerate_matrices(y.ring(), y.group(), y.dim())?;
    for z in &all {
        if y.mul(z)?.is_identity() && z.mul(y)?.is_identity() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2_alphabet() -> Alphabet {
        Alphabet::vector_space(2, 1).unwrap()
    }

    fn xor_ca_on_c3() -> AdditiveCA {
        // memory {(0,[1]), (1,[1])}: two-site XOR.
        let c3 = Group::cyclic(3);
        AdditiveCA::new(
            c3.clone(),
            f2_alphabet(),
            vec![
                (c3.element(Payload::Residue(0)).unwrap(), vec![vec![1]]),
                (c3.element(Payload::Residue(1)).unwrap(), vec![vec![1]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_memory_is_constant_zero() {
        let c3 = Group::cyclic(3);
        let ca = AdditiveCA::new(c3.clone(), f2_alphabet(), vec![]).unwrap();
        let ones = Configuration::new(c3.clone(), vec![vec![1], vec![1], vec![1]]).unwrap();
        let out = apply_ca(&ca, &ones).unwrap();
        assert!(out.values().iter().all(|v| v[0] == 0));
    }

    #[test]
    fn xor_ca_kills_all_ones() {
        let ca = xor_ca_on_c3();
        let c3 = ca.group().clone();
        let ones = Configuration::new(c3, vec![vec![1], vec![1], vec![1]]).unwrap();
        let out = apply_ca(&ca, &ones).unwrap();
        assert!(out.values().iter().all(|v| v[0] == 0));
    }

    #[test]
    fn shift_ca_permutes() {
        let c3 = Group::cyclic(3);
        let ca = AdditiveCA::new(
            c3.clone(),
            f2_alphabet(),
            vec![(c3.element(Payload::Residue(1)).unwrap(), vec![vec![1]])],
        )
        .unwrap();
        let c = Configuration::new(c3.clone(), vec![vec![1], vec![0], vec![0]]).unwrap();
        let out = apply_ca(&ca, &c).unwrap();
        // τ(c)(g) = c(g+1): site 2 now holds the 1.
        assert_eq!(out.values(), &[vec![0], vec![0], vec![1]]);
        let analysis = ca_kernel_image(&ca, 1 << 20).unwrap();
        assert!(analysis.injective && analysis.surjective);
    }

    #[test]
    fn equivariance_spot_check() {
        let ca = xor_ca_on_c3();
        let c3 = ca.group().clone();
        let g = c3.element(Payload::Residue(1)).unwrap();
        for bits in 0..8u64 {
            let values: Vec<Vec<u64>> = (0..3).map(|i| vec![(bits >> i) & 1]).collect();
            let c = Configuration::new(c3.clone(), values).unwrap();
            let lhs = apply_ca(&ca, &c.shift(&g).unwrap()).unwrap();
            let rhs = apply_ca(&ca, &c).unwrap().shift(&g).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn kernel_image_of_one_plus_s() {
        // τ = multiplication by 1+s over F_2[C3]: |ker| = 2, |im| = 4.
        let ca = xor_ca_on_c3();
        let analysis = ca_kernel_image_brute(&ca).unwrap();
        assert_eq!(analysis.kernel_order, BigInt::from(2));
        assert_eq!(analysis.image_order, BigInt::from(4));
        // Lattice path agrees with the brute-force oracle.
        let lattice = ca_kernel_image_lattice(&ca).unwrap();
        assert_eq!(lattice.kernel_order, analysis.kernel_order);
        assert_eq!(lattice.image_order, analysis.image_order);
    }

    #[test]
    fn multiply_by_two_on_z4() {
        // Γ=C2, A=Z/4, M_0 = multiply-by-2: |ker| = 4, |im| = 4.
        let c2 = Group::cyclic(2);
        let a = Alphabet::cyclic(4).unwrap();
        let ca = AdditiveCA::new(
            c2.clone(),
            a,
            vec![(c2.identity(), vec![vec![2]])],
        )
        .unwrap();
        let analysis = ca_kernel_image_brute(&ca).unwrap();
        assert_eq!(analysis.kernel_order, BigInt::from(4));
        assert_eq!(analysis.image_order, BigInt::from(4));
        assert!(!analysis.injective && !analysis.surjective);
        let lattice = ca_kernel_image_lattice(&ca).unwrap();
        assert_eq!(lattice.kernel_order, BigInt::from(4));
    }

    #[test]
    fn matrix_roundtrip_1x1() {
        let ring = make_gf(2, 1).unwrap();
        let c3 = Group::cyclic(3);
        let s = |k: u64| c3.element(Payload::Residue(k)).unwrap();
        let y = RingMatrix::from_element(
            GroupRingElement::new(
                ring.clone(),
                c3.clone(),
                vec![(s(0), ring.one()), (s(1), ring.one())],
            )
            .unwrap(),
        );
        let ca = ca_from_matrix(&y).unwrap();
        assert_eq!(ca, xor_ca_on_c3());
        assert_eq!(matrix_from_ca(&ca).unwrap(), y);
    }

    #[test]
    fn matrix_roundtrip_2x2() {
        // Γ=C2, d=2, Y=[[1,g],[0,1]]: memory {e: I, g: [[0,1],[0,0]]}.
        let ring = make_gf(2, 1).unwrap();
        let c2 = Group::cyclic(2);
        let e = c2.element(Payload::Residue(0)).unwrap();
        let g = c2.element(Payload::Residue(1)).unwrap();
        let one = GroupRingElement::one(ring.clone(), c2.clone());
        let zero = GroupRingElement::zero(ring.clone(), c2.clone());
        let ge = GroupRingElement::term(ring.clone(), g.clone(), ring.one()).unwrap();
        let y = RingMatrix::new(
            ring.clone(),
            c2.clone(),
            2,
            vec![one.clone(), ge, zero.clone(), one.clone()],
        )
        .unwrap();
        let ca = ca_from_matrix(&y).unwrap();
        let mem: Vec<_> = ca.memory().to_vec();
        assert_eq!(mem.len(), 2);
        assert_eq!(mem[0].0, e);
        assert_eq!(mem[0].1, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(mem[1].0, g);
        assert_eq!(mem[1].1, vec![vec![0, 1], vec![0, 0]]);
        assert_eq!(matrix_from_ca(&ca).unwrap(), y);
    }

    #[test]
    fn decompose_z6_components() {
        // A = Z/6 over C2: components Z/2 and Z/3; kernel product holds.
        let c2 = Group::cyclic(2);
        let a = Alphabet::cyclic(6).unwrap();
        // M_0 = multiply by (1 mod 2, 0 mod 3) -> matrix diag(1, 3)? In
        // coordinates (Z/2, Z/3): multiply-by-3 is (1 mod 2, 0 mod 3).
        let ca = AdditiveCA::new(
            c2.clone(),
            a.clone(),
            vec![(c2.identity(), vec![vec![1, 0], vec![0, 0]])],
        )
        .unwrap();
        let report = decompose_ca(&ca, 1 << 20).unwrap();
        assert!(report.kernel_product_identity);
        assert_eq!(report.components.len(), 2);
        // 2-part is the identity (kernel 1), 3-part is zero (kernel 9).
        assert_eq!(report.components[0].kernel_order, BigInt::from(1));
        assert_eq!(report.components[1].kernel_order, BigInt::from(9));
    }

    #[test]
    fn decompose_z4_unit_multiplier() {
        // A=Z/4 over C2, M_0 = multiply-by-3 (a unit): everything bijective.
        let c2 = Group::cyclic(2);
        let a = Alphabet::cyclic(4).unwrap();
        let ca = AdditiveCA::new(c2.clone(), a, vec![(c2.identity(), vec![vec![3]])]).unwrap();
        let report = decompose_ca(&ca, 1 << 20).unwrap();
        assert!(report.kernel_product_identity);
        assert!(report.injectivity_inherited);
        let comp = &report.components[0];
        assert!(comp.injective);
        assert_eq!(comp.restriction_kernel, BigInt::from(1));
        assert_eq!(comp.quotient_kernel, Some(BigInt::from(1)));
    }

    #[test]
    fn decompose_mixed_exponents_within_one_prime() {
        // A = Z/2 ⊕ Z/4 over C2: the torsion restriction is linear over
        // F_2 and the quotient lives on Z/2.
        let c2 = Group::cyclic(2);
        let a = Alphabet::new(vec![(2, 1, 1), (2, 2, 1)]).unwrap();
        // Entry (0,1) goes Z/2 -> Z/4 and must carry a factor of 2.
        let ca = AdditiveCA::new(
            c2.clone(),
            a,
            vec![(c2.identity(), vec![vec![1, 2], vec![1, 3]])],
        )
        .unwrap();
        let report = decompose_ca(&ca, 1 << 20).unwrap();
        assert!(report.kernel_product_identity);
        assert!(report.injectivity_inherited);
        let comp = &report.components[0];
        // The map is bijective (triangular-ish with unit diagonal), so
        // restriction and quotient kernels are trivial.
        let whole = ca_kernel_image_brute(&ca).unwrap();
        assert_eq!(whole.kernel_order, comp.kernel_order);
        if comp.injective {
            assert_eq!(comp.restriction_kernel, BigInt::from(1));
            assert_eq!(comp.quotient_kernel, Some(BigInt::from(1)));
        }
    }

    #[test]
    fn exponent_p_alphabet_decomposition_is_identity() {
        let c2 = Group::cyclic(2);
        let a = Alphabet::vector_space(2, 2).unwrap();
        let ca = AdditiveCA::new(
            c2.clone(),
            a,
            vec![(c2.identity(), vec![vec![1, 1], vec![0, 1]])],
        )
        .unwrap();
        let report = decompose_ca(&ca, 1 << 20).unwrap();
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.whole_kernel, report.components[0].kernel_order);
    }

    #[test]
    fn congruence_validation() {
        // Z/2 -> Z/4 entries must carry a factor of 2.
        let c2 = Group::cyclic(2);
        let a = Alphabet::new(vec![(2, 1, 1), (2, 2, 1)]).unwrap();
        let bad = AdditiveCA::new(
            c2.clone(),
            a.clone(),
            vec![(c2.identity(), vec![vec![1, 1], vec![0, 1]])],
        );
        assert_eq!(bad.unwrap_err(), Error::InvalidAlphabetEndo(0, 1));
        let good = AdditiveCA::new(
            c2.clone(),
            a,
            vec![(c2.identity(), vec![vec![1, 2], vec![1, 1]])],
        );
        assert!(good.is_ok());
    }

    #[test]
    fn surjunctivity_sweep_c3_f2() {
        // All 8 memory kernels over (C3, F_2): units {1, s, s^2} give 3
        // bijective CAs, zero violations.
        let report = surjunctivity_report(
            &Group::cyclic(3),
            &f2_alphabet(),
            SweepScope::ExhaustiveUpToBudget,
            1 << 20,
        )
        .unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.cas_checked, 8);
        assert_eq!(report.bijective_count, 3);
        assert!(report.violations.is_empty());
        assert!(report.csc_mismatches.is_empty());
    }

    #[test]
    fn surjunctivity_sweep_c2_f2() {
        let report = surjunctivity_report(
            &Group::cyclic(2),
            &f2_alphabet(),
            SweepScope::ExhaustiveUpToBudget,
            1 << 20,
        )
        .unwrap();
        assert_eq!(report.cas_checked, 4);
        assert_eq!(report.bijective_count, 2); // units {1, g}
        assert!(report.violations.is_empty());
        assert!(report.csc_mismatches.is_empty());
    }

    #[test]
    fn surjunctivity_sample_z4() {
        let report = surjunctivity_report(
            &Group::cyclic(2),
            &Alphabet::cyclic(4).unwrap(),
            SweepScope::Sample { count: 20, seed: 9 },
            1 << 20,
        )
        .unwrap();
        assert_eq!(report.cas_checked, 20);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn brute_and_lattice_kernels_agree_on_random_cas() {
        // Dual-route oracle: enumeration vs Smith-style elimination.
        let mut rng = crate::rng::SplitMix64::new(0xA11A);
        let cases: Vec<(Group, Alphabet)> = vec![
            (Group::cyclic(2), Alphabet::cyclic(4).unwrap()),
            (Group::cyclic(3), Alphabet::vector_space(2, 1).unwrap()),
            (Group::cyclic(2), Alphabet::cyclic(6).unwrap()),
            (Group::cyclic(2), Alphabet::new(vec![(2, 1, 1), (2, 2, 1)]).unwrap()),
        ];
        for (group, alphabet) in &cases {
            let mats = valid_matrices(alphabet);
            let sites = group.enumerate().unwrap();
            for _ in 0..20 {
                let memory: Vec<(GroupElement, Vec<Vec<i64>>)> = sites
                    .iter()
                    .map(|s| {
                        let m = &mats[rng.below(mats.len() as u64) as usize];
                        (
                            s.clone(),
                            m.iter()
                                .map(|row| row.iter().map(|&v| v as i64).collect())
                                .collect(),
                        )
                    })
                    .collect();
                let ca = AdditiveCA::new(group.clone(), alphabet.clone(), memory).unwrap();
                let brute = ca_kernel_image_brute(&ca).unwrap();
                let lattice = ca_kernel_image_lattice(&ca).unwrap();
                assert_eq!(brute.kernel_order, lattice.kernel_order);
                assert_eq!(brute.image_order, lattice.image_order);
            }
        }
    }

    #[test]
    fn smith_diagonal_known_values() {
        // [[2,4],[6,8]]: SNF diag (2, 4), coker size 8 (det = -8).
        let m = vec![
            vec![BigInt::from(2), BigInt::from(4)],
            vec![BigInt::from(6), BigInt::from(8)],
        ];
        let d = smith_diagonal(m);
        let prod: BigInt = d.iter().map(|x| x.abs()).product();
        assert_eq!(prod, BigInt::from(8));
    }

    #[test]
    fn windowed_evaluation_over_z() {
        let z = Group::infinite_cyclic();
        let ca = AdditiveCA::new(
            z.clone(),
            f2_alphabet(),
            vec![(z.element(Payload::Int(BigInt::from(1))).unwrap(), vec![vec![1]])],
        )
        .unwrap();
        let mut window = BTreeMap::new();
        window.insert(Payload::Int(BigInt::from(1)), vec![1]);
        let (out, bounded) = apply_ca_windowed(&ca, &window, 1).unwrap();
        assert!(bounded);
        // τ(c)(0) = c(0+1) = 1.
        assert_eq!(out[&Payload::Int(BigInt::from(0))], vec![1]);
        // Zero extension beyond the window.
        assert_eq!(out[&Payload::Int(BigInt::from(1))], vec![0]);
    }
}
