//! Text forms used by the command-line front end.
//!
//! Grammars (whitespace-insensitive unless noted):
//!
//! * group specs — `C2`, `Z`, `Z^2`, `S3`, `C2xC4`,
//!   `perm:[(1 2),(1 2 3)]`; `x` joins product factors at top level.
//! * coefficient rings — `Z`, `Z/4`, `F2`, `F9`, `GF(3,2)`, `F4(t)`.
//! * group-ring elements — sums of terms like `1 + x^2`, `3*x^-1`,
//!   `1 + g`; the identifiers `g`, `s`, `x` all denote the generator of
//!   a cyclic group (finite or infinite).
//! * matrices — bracketed row lists of element expressions:
//!   `[[1+g, 0],[g, 1]]`.
//! * alphabets — `F2`, `F2^3`, `Z/4`, `Z/6`, `Z/2+Z/4`.
//! * CA memory — `[(site,[[m]]),…]`; 1×1 matrices may drop one bracket
//!   level; sites are integers for cyclic groups or tuples `(a,b)` for
//!   products.
//! * towers — `[alg:x^2+x+1, transc]`; algebraic generators are named
//!   `x`, `y`, `z`, `w` in order of appearance, transcendental ones
//!   `t`, `u`, `v`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement, GroupSpec, Payload};
use crate::localembed::{FieldTowerStep, TowerElem, TowerField};
use crate::matrices::RingMatrix;
use crate::rings::{make_gf, CoeffRing, GroupRingElement, RingScalar};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut v = 0i64;
                while let Some(&d) = chars.peek() {
                    if let Some(digit) = d.to_digit(10) {
                        v = v
                            .checked_mul(10)
                            .and_then(|v| v.checked_add(digit as i64))
                            .ok_or_else(|| parse_err("integer overflow"))?;
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Int(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(name));
            }
            '+' => {
                chars.next();
                out.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                out.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                out.push(Tok::Star);
            }
            '/' => {
                chars.next();
                out.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                out.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                out.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                out.push(Tok::RParen);
            }
            '[' => {
                chars.next();
                out.push(Tok::LBracket);
            }
            ']' => {
                chars.next();
                out.push(Tok::RBracket);
            }
            ',' => {
                chars.next();
                out.push(Tok::Comma);
            }
            _ => return Err(parse_err(format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

/// The value algebra an expression evaluates into.
trait ExprAlgebra {
    type Value: Clone;
    fn constant_int(&self, n: i64) -> Result<Self::Value>;
    fn variable(&self, name: &str) -> Result<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn pow(&self, a: &Self::Value, n: i64) -> Result<Self::Value>;
}

struct Parser<'a, A: ExprAlgebra> {
    toks: &'a [Tok],
    pos: usize,
    algebra: &'a A,
}

impl<'a, A: ExprAlgebra> Parser<'a, A> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<A::Value> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.algebra.add(&acc, &t)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    let nt = self.algebra.neg(&t)?;
                    acc = self.algebra.add(&acc, &nt)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<A::Value> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = self.algebra.mul(&acc, &f)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = self.algebra.div(&acc, &f)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<A::Value> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let f = self.factor()?;
            return self.algebra.neg(&f);
        }
        let base = match self.next() {
            Some(Tok::Int(n)) => self.algebra.constant_int(n)?,
            Some(Tok::Ident(name)) => self.algebra.variable(&name)?,
            Some(Tok::LParen) => {
                let e = self.expr()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(parse_err("expected )"));
                }
                e
            }
            other => return Err(parse_err(format!("unexpected token {other:?}"))),
        };
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let sign = if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                -1
            } else {
                1
            };
            let Some(Tok::Int(n)) = self.next() else {
                return Err(parse_err("expected integer exponent"));
            };
            return self.algebra.pow(&base, sign * n);
        }
        Ok(base)
    }
}

fn eval_expr<A: ExprAlgebra>(algebra: &A, toks: &[Tok]) -> Result<(A::Value, usize)> {
    let mut p = Parser {
        toks,
        pos: 0,
        algebra,
    };
    let v = p.expr()?;
    Ok((v, p.pos))
}

// ---------------------------------------------------------------------------
// Group-ring element expressions
// ---------------------------------------------------------------------------

struct GroupRingAlgebra {
    ring: CoeffRing,
    group: Group,
}

impl GroupRingAlgebra {
    fn generator(&self) -> Result<GroupRingElement> {
        let payload = match self.group.spec() {
            GroupSpec::Cyclic(0) => Payload::Int(BigInt::from(1)),
            GroupSpec::Cyclic(n) if *n >= 2 => Payload::Residue(1),
            _ => {
                return Err(parse_err(
                    "generator symbols are defined for cyclic groups only",
                ))
            }
        };
        let g = self.group.element(payload)?;
        GroupRingElement::term(self.ring.clone(), g, self.ring.one())
    }
}

impl ExprAlgebra for GroupRingAlgebra {
    type Value = GroupRingElement;

    fn constant_int(&self, n: i64) -> Result<GroupRingElement> {
        GroupRingElement::scalar(self.ring.clone(), self.group.clone(), self.ring.from_int(n))
    }

    fn variable(&self, name: &str) -> Result<GroupRingElement> {
        match name {
            "g" | "s" | "x" => self.generator(),
            _ => Err(parse_err(format!("unknown symbol {name}"))),
        }
    }

    fn add(&self, a: &GroupRingElement, b: &GroupRingElement) -> Result<GroupRingElement> {
        a.add(b)
    }

    fn neg(&self, a: &GroupRingElement) -> Result<GroupRingElement> {
        Ok(a.neg())
    }

    fn mul(&self, a: &GroupRingElement, b: &GroupRingElement) -> Result<GroupRingElement> {
        a.mul(b)
    }

    fn div(&self, _a: &GroupRingElement, _b: &GroupRingElement) -> Result<GroupRingElement> {
        Err(parse_err("division is not defined in group rings"))
    }

    fn pow(&self, a: &GroupRingElement, n: i64) -> Result<GroupRingElement> {
        if n >= 0 {
            let mut acc = GroupRingElement::one(self.ring.clone(), self.group.clone());
            for _ in 0..n {
                acc = acc.mul(a)?;
            }
            return Ok(acc);
        }
        // Negative powers: only single-term monomials with unit coefficient.
        if a.support().len() != 1 {
            return Err(parse_err("negative power of a non-monomial"));
        }
        let (g, c) = &a.support()[0];
        let ginv = self.group.inv(g)?;
        let cinv = c.inv().map_err(|_| parse_err("coefficient is not a unit"))?;
        let base = GroupRingElement::term(self.ring.clone(), ginv, cinv)?;
        let mut acc = GroupRingElement::one(self.ring.clone(), self.group.clone());
        for _ in 0..(-n) {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }
}

pub fn parse_group_ring_element(
    ring: &CoeffRing,
    group: &Group,
    text: &str,
) -> Result<GroupRingElement> {
    let toks = tokenize(text)?;
    let algebra = GroupRingAlgebra {
        ring: ring.clone(),
        group: group.clone(),
    };
    let (v, used) = eval_expr(&algebra, &toks)?;
    if used != toks.len() {
        return Err(parse_err(format!("trailing input in {text:?}")));
    }
    Ok(v)
}

/// Parses `[[e, e],[e, e]]` into a square matrix of element expressions.
pub fn parse_matrix(ring: &CoeffRing, group: &Group, text: &str) -> Result<RingMatrix> {
    let toks = tokenize(text)?;
    if toks.first() != Some(&Tok::LBracket) {
        return Err(parse_err("matrix must start with ["));
    }
    let algebra = GroupRingAlgebra {
        ring: ring.clone(),
        group: group.clone(),
    };
    let mut rows: Vec<Vec<GroupRingElement>> = Vec::new();
    let mut pos = 1;
    loop {
        if toks.get(pos) != Some(&Tok::LBracket) {
            return Err(parse_err("expected [ to open a row"));
        }
        pos += 1;
        let mut row = Vec::new();
        loop {
            let (v, used) = eval_expr(&algebra, &toks[pos..])?;
            pos += used;
            row.push(v);
            match toks.get(pos) {
                Some(Tok::Comma) => pos += 1,
                Some(Tok::RBracket) => {
                    pos += 1;
                    break;
                }
                other => return Err(parse_err(format!("unexpected token in row: {other:?}"))),
            }
        }
        rows.push(row);
        match toks.get(pos) {
            Some(Tok::Comma) => pos += 1,
            Some(Tok::RBracket) => {
                pos += 1;
                break;
            }
            other => return Err(parse_err(format!("unexpected token after row: {other:?}"))),
        }
    }
    if pos != toks.len() {
        return Err(parse_err("trailing input after matrix"));
    }
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(parse_err("matrix must be square"));
    }
    let entries = rows.into_iter().flatten().collect();
    RingMatrix::new(ring.clone(), group.clone(), d, entries)
}

// ---------------------------------------------------------------------------
// Group specs
// ---------------------------------------------------------------------------

pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let text = text.trim();
    // Split on top-level 'x' separators (product), outside brackets.
    let mut depth = 0usize;
    let mut parts = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            'x' if depth == 0 => {
                parts.push(cur.clone());
                cur.clear();
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur);
    if parts.len() > 1 {
        let specs = parts
            .iter()
            .map(|p| parse_group_spec(p))
            .collect::<Result<Vec<_>>>()?;
        return Ok(GroupSpec::Product(specs));
    }
    let text = parts[0].trim();
    if text == "Z" {
        return Ok(GroupSpec::Cyclic(0));
    }
    if text == "1" {
        return Ok(GroupSpec::Cyclic(1));
    }
    if let Some(rank) = text.strip_prefix("Z^") {
        let r: usize = rank
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad rank in {text:?}")))?;
        return Ok(GroupSpec::FreeAbelian(r));
    }
    if let Some(n) = text.strip_prefix('C') {
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad cyclic order in {text:?}")))?;
        if n == 0 {
            return Err(parse_err("use Z for the infinite cyclic group"));
        }
        return Ok(GroupSpec::Cyclic(n));
    }
    if let Some(n) = text.strip_prefix('S') {
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad symmetric degree in {text:?}")))?;
        let g = Group::symmetric(n)?;
        return Ok(g.spec().clone());
    }
    if let Some(rest) = text.strip_prefix("perm:") {
        return parse_permutation_spec(rest);
    }
    Err(parse_err(format!("unrecognized group spec {text:?}")))
}

fn parse_permutation_spec(text: &str) -> Result<GroupSpec> {
    let text = text.trim();
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| parse_err("perm generators must be bracketed"))?;
    // Generators separated by commas at depth 0; each is one or more
    // parenthesized cycles of space-separated points.
    let mut gens_text = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => {
                gens_text.push(cur.clone());
                cur.clear();
            }
            _ => cur.push(c),
        }
    }
    gens_text.push(cur);
    // First pass: find the largest point.
    let mut max_point = 0usize;
    let mut parsed: Vec<Vec<Vec<usize>>> = Vec::new();
    for g in &gens_text {
        let mut cycles = Vec::new();
        for cyc in g.split(')') {
            let cyc = cyc.trim().trim_start_matches('(').trim();
            if cyc.is_empty() {
                continue;
            }
            let points = cyc
                .split_whitespace()
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|_| parse_err(format!("bad point {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            for &p in &points {
                if p == 0 {
                    return Err(parse_err("points are 1-based"));
                }
                max_point = max_point.max(p);
            }
            cycles.push(points);
        }
        parsed.push(cycles);
    }
    if max_point == 0 {
        return Err(parse_err("no points in permutation generators"));
    }
    let mut gens = Vec::new();
    for cycles in parsed {
        let mut image: Vec<usize> = (0..max_point).collect();
        for cyc in cycles {
            // Apply the cycle: point cyc[i] maps to cyc[i+1].
            let mut step: Vec<usize> = (0..max_point).collect();
            for i in 0..cyc.len() {
                step[cyc[i] - 1] = cyc[(i + 1) % cyc.len()] - 1;
            }
            image = image.iter().map(|&i| step[i]).collect();
        }
        gens.push(image);
    }
    Ok(GroupSpec::Permutation(gens))
}

// ---------------------------------------------------------------------------
// Rings and alphabets
// ---------------------------------------------------------------------------

pub fn parse_coeff_ring(text: &str) -> Result<CoeffRing> {
    let text = text.trim();
    if text == "Z" {
        return Ok(CoeffRing::Integers);
    }
    if let Some(n) = text.strip_prefix("Z/") {
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad modulus in {text:?}")))?;
        if n < 2 {
            return Err(parse_err("modulus must be >= 2"));
        }
        return Ok(CoeffRing::z_mod(n));
    }
    if let Some(rest) = text.strip_prefix("GF(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| parse_err("expected )"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(parse_err("GF takes (p, k)"));
        }
        let p: u64 = parts[0].trim().parse().map_err(|_| parse_err("bad p"))?;
        let k: usize = parts[1].trim().parse().map_err(|_| parse_err("bad k"))?;
        return make_gf(p, k);
    }
    if let Some(rest) = text.strip_prefix('F') {
        let (q_text, transcendental) = match rest.strip_suffix("(t)") {
            Some(q) => (q, true),
            None => (rest, false),
        };
        let q: u64 = q_text
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad field size in {text:?}")))?;
        let (p, k) = prime_power(q).ok_or_else(|| {
            parse_err(format!("{q} is not a prime power"))
        })?;
        let gf = make_gf(p, k)?;
        if transcendental {
            return CoeffRing::rat_fun_over(&gf);
        }
        return Ok(gf);
    }
    Err(parse_err(format!("unrecognized ring {text:?}")))
}

fn prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut k = 0;
            let mut rem = q;
            while rem % p == 0 {
                rem /= p;
                k += 1;
            }
            return if rem == 1 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

pub fn parse_alphabet(text: &str) -> Result<crate::automata::Alphabet> {
    let text = text.trim();
    let mut structure: Vec<(u64, u32, usize)> = Vec::new();
    for part in text.split('+') {
        let part = part.trim();
        if let Some(rest) = part.strip_prefix('F') {
            let (q_text, dim) = match rest.split_once('^') {
                Some((q, d)) => (
                    q,
                    d.trim()
                        .parse::<usize>()
                        .map_err(|_| parse_err("bad dimension"))?,
                ),
                None => (rest, 1),
            };
            let q: u64 = q_text.trim().parse().map_err(|_| parse_err("bad size"))?;
            let (p, k) = prime_power(q).ok_or_else(|| parse_err("not a prime power"))?;
            if k != 1 {
                return Err(parse_err(
                    "alphabet vector spaces are over prime fields",
                ));
            }
            structure.push((p, 1, dim));
        } else if let Some(n) = part.strip_prefix("Z/") {
            let n: u64 = n.trim().parse().map_err(|_| parse_err("bad modulus"))?;
            let a = crate::automata::Alphabet::cyclic(n)?;
            structure.extend_from_slice(a.structure());
        } else {
            return Err(parse_err(format!("unrecognized alphabet part {part:?}")));
        }
    }
    // Merge multiplicities of equal (p, e) and sort.
    let mut merged: BTreeMap<(u64, u32), usize> = BTreeMap::new();
    for (p, e, d) in structure {
        *merged.entry((p, e)).or_insert(0) += d;
    }
    crate::automata::Alphabet::new(
        merged
            .into_iter()
            .map(|((p, e), d)| (p, e, d))
            .collect(),
    )
}

/// Parses a memory list `[(site, [[..]]), …]`; 1×1 matrices may be
/// written `[m]`.
pub fn parse_memory(
    group: &Group,
    alphabet: &crate::automata::Alphabet,
    text: &str,
) -> Result<Vec<(GroupElement, Vec<Vec<i64>>)>> {
    let toks = tokenize(text)?;
    let t = alphabet.num_generators();
    let mut pos = 0;
    if toks.get(pos) != Some(&Tok::LBracket) {
        return Err(parse_err("memory must be bracketed"));
    }
    pos += 1;
    let mut out = Vec::new();
    if toks.get(pos) == Some(&Tok::RBracket) {
        return Ok(out);
    }
    loop {
        if toks.get(pos) != Some(&Tok::LParen) {
            return Err(parse_err("expected ( for a memory entry"));
        }
        pos += 1;
        let (site, used) = parse_site(group, &toks[pos..])?;
        pos += used;
        if toks.get(pos) != Some(&Tok::Comma) {
            return Err(parse_err("expected , after the site"));
        }
        pos += 1;
        let (matrix, used) = parse_int_matrix(&toks[pos..], t)?;
        pos += used;
        if toks.get(pos) != Some(&Tok::RParen) {
            return Err(parse_err("expected ) to close a memory entry"));
        }
        pos += 1;
        out.push((site, matrix));
        match toks.get(pos) {
            Some(Tok::Comma) => pos += 1,
            Some(Tok::RBracket) => break,
            other => return Err(parse_err(format!("unexpected token {other:?}"))),
        }
    }
    Ok(out)
}

fn parse_site(group: &Group, toks: &[Tok]) -> Result<(GroupElement, usize)> {
    match group.spec() {
        GroupSpec::Cyclic(n) => {
            let (neg, int_pos) = if toks.first() == Some(&Tok::Minus) {
                (true, 1)
            } else {
                (false, 0)
            };
            let Some(Tok::Int(v)) = toks.get(int_pos) else {
                return Err(parse_err("expected an integer site"));
            };
            let v = if neg { -v } else { *v };
            let payload = if *n == 0 {
                Payload::Int(BigInt::from(v))
            } else {
                Payload::Residue(v.rem_euclid(*n as i64) as u64)
            };
            Ok((group.element(payload)?, int_pos + 1))
        }
        GroupSpec::Product(specs) => {
            if toks.first() != Some(&Tok::LParen) {
                return Err(parse_err("expected ( for a product site"));
            }
            let mut pos = 1;
            let mut parts = Vec::new();
            for (i, spec) in specs.iter().enumerate() {
                let sub = Group::new(spec.clone())?;
                let (e, used) = parse_site(&sub, &toks[pos..])?;
                pos += used;
                parts.push(e.payload().clone());
                if i + 1 < specs.len() {
                    if toks.get(pos) != Some(&Tok::Comma) {
                        return Err(parse_err("expected , in a product site"));
                    }
                    pos += 1;
                }
            }
            if toks.get(pos) != Some(&Tok::RParen) {
                return Err(parse_err("expected ) after a product site"));
            }
            Ok((group.element(Payload::Tuple(parts))?, pos + 1))
        }
        _ => Err(parse_err(
            "memory sites parse for cyclic and product groups only",
        )),
    }
}

fn parse_int_matrix(toks: &[Tok], t: usize) -> Result<(Vec<Vec<i64>>, usize)> {
    if toks.first() != Some(&Tok::LBracket) {
        return Err(parse_err("expected [ for a matrix"));
    }
    // Either [[..],[..]] or a flat [a, b, …] for a single row (t = 1 per
    // entry count).
    if toks.get(1) == Some(&Tok::LBracket) {
        let mut rows = Vec::new();
        let mut pos = 1;
        loop {
            let (row, used) = parse_int_row(&toks[pos..])?;
            pos += used;
            rows.push(row);
            match toks.get(pos) {
                Some(Tok::Comma) => pos += 1,
                Some(Tok::RBracket) => {
                    pos += 1;
                    break;
                }
                other => return Err(parse_err(format!("unexpected token {other:?}"))),
            }
        }
        if rows.len() != t || rows.iter().any(|r| r.len() != t) {
            return Err(parse_err(format!("matrix must be {t}x{t}")));
        }
        Ok((rows, pos))
    } else {
        let (row, used) = parse_int_row(toks)?;
        if t == 1 && row.len() == 1 {
            Ok((vec![row], used))
        } else {
            Err(parse_err("flat matrix form is for 1x1 matrices"))
        }
    }
}

fn parse_int_row(toks: &[Tok]) -> Result<(Vec<i64>, usize)> {
    if toks.first() != Some(&Tok::LBracket) {
        return Err(parse_err("expected [ for a row"));
    }
    let mut pos = 1;
    let mut row = Vec::new();
    loop {
        let neg = toks.get(pos) == Some(&Tok::Minus);
        if neg {
            pos += 1;
        }
        let Some(Tok::Int(v)) = toks.get(pos) else {
            return Err(parse_err("expected an integer entry"));
        };
        pos += 1;
        row.push(if neg { -v } else { *v });
        match toks.get(pos) {
            Some(Tok::Comma) => pos += 1,
            Some(Tok::RBracket) => {
                pos += 1;
                return Ok((row, pos));
            }
            other => return Err(parse_err(format!("unexpected token {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Towers
// ---------------------------------------------------------------------------

/// A parsed tower with named stage generators.
#[derive(Debug, Clone)]
pub struct ParsedTower {
    pub steps: Vec<FieldTowerStep>,
    pub field: TowerField,
    /// Variable name → element of the top stage.
    pub variables: BTreeMap<String, TowerElem>,
}

/// Parses `[alg:x^2+x+1, transc, …]` over F_p. Algebraic generators are
/// named x, y, z, w in order; transcendental ones t, u, v.
pub fn parse_tower(p: u64, text: &str) -> Result<ParsedTower> {
    let text = text.trim();
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| parse_err("tower must be bracketed"))?;
    let mut field = TowerField::prime_field(p)?;
    let mut steps: Vec<FieldTowerStep> = Vec::new();
    // Variables live in the stage where they were born; lift them as the
    // tower grows.
    let mut variables: BTreeMap<String, TowerElem> = BTreeMap::new();
    let alg_names = ["x", "y", "z", "w"];
    let transc_names = ["t", "u", "v"];
    let mut alg_count = 0;
    let mut transc_count = 0;
    let parts: Vec<&str> = if inner.trim().is_empty() {
        vec![]
    } else {
        inner.split(',').collect()
    };
    for part in parts {
        let part = part.trim();
        if part == "transc" {
            let name = *transc_names
                .get(transc_count)
                .ok_or_else(|| parse_err("too many transcendental steps"))?;
            transc_count += 1;
            let new_field = TowerField::RatFun {
                base: Arc::new(field.clone()),
            };
            // Lift existing variables to constants of the new stage.
            for v in variables.values_mut() {
                *v = TowerElem::Fraction(vec![v.clone()], vec![field.one()]);
            }
            variables.insert(
                name.to_string(),
                TowerElem::Fraction(vec![field.zero(), field.one()], vec![field.one()]),
            );
            field = new_field;
            steps.push(FieldTowerStep::Transcendental);
        } else if let Some(poly_text) = part.strip_prefix("alg:") {
            let name = *alg_names
                .get(alg_count)
                .ok_or_else(|| parse_err("too many algebraic steps"))?;
            alg_count += 1;
            let modulus = parse_stage_poly(&field, &variables, name, poly_text)?;
            let new_field = TowerField::Algebraic {
                base: Arc::new(field.clone()),
                modulus: modulus.clone(),
            };
            for v in variables.values_mut() {
                *v = TowerElem::Poly(vec![v.clone()]);
            }
            variables.insert(
                name.to_string(),
                TowerElem::Poly(vec![field.zero(), field.one()]),
            );
            field = new_field;
            steps.push(FieldTowerStep::Algebraic(modulus));
        } else {
            return Err(parse_err(format!("unrecognized tower step {part:?}")));
        }
    }
    // Re-validate through build_tower (irreducibility checks).
    let rebuilt = crate::localembed::build_tower(p, &steps)?;
    debug_assert_eq!(rebuilt, field);
    Ok(ParsedTower {
        steps,
        field,
        variables,
    })
}

/// Polynomials over a tower stage, for parsing moduli: values are
/// coefficient vectors; `new_var` is the indeterminate.
struct StagePolyAlgebra<'f> {
    field: &'f TowerField,
    vars: &'f BTreeMap<String, TowerElem>,
    new_var: &'f str,
}

impl<'f> StagePolyAlgebra<'f> {
    fn constant(&self, c: TowerElem) -> Vec<TowerElem> {
        if self.field.is_zero(&c) {
            vec![]
        } else {
            vec![c]
        }
    }
}

impl<'f> ExprAlgebra for StagePolyAlgebra<'f> {
    type Value = Vec<TowerElem>;

    fn constant_int(&self, n: i64) -> Result<Vec<TowerElem>> {
        Ok(self.constant(self.field.from_int(n)))
    }

    fn variable(&self, name: &str) -> Result<Vec<TowerElem>> {
        if name == self.new_var {
            return Ok(vec![self.field.zero(), self.field.one()]);
        }
        match self.vars.get(name) {
            Some(v) => Ok(self.constant(v.clone())),
            None => Err(parse_err(format!("unknown symbol {name}"))),
        }
    }

    fn add(&self, a: &Vec<TowerElem>, b: &Vec<TowerElem>) -> Result<Vec<TowerElem>> {
        let n = a.len().max(b.len());
        let zero = self.field.zero();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(
                self.field
                    .add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))?,
            );
        }
        while out.last().map(|c| self.field.is_zero(c)) == Some(true) {
            out.pop();
        }
        Ok(out)
    }

    fn neg(&self, a: &Vec<TowerElem>) -> Result<Vec<TowerElem>> {
        a.iter().map(|c| self.field.neg(c)).collect()
    }

    fn mul(&self, a: &Vec<TowerElem>, b: &Vec<TowerElem>) -> Result<Vec<TowerElem>> {
        if a.is_empty() || b.is_empty() {
            return Ok(vec![]);
        }
        let mut out = vec![self.field.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let t = self.field.mul(x, y)?;
                out[i + j] = self.field.add(&out[i + j], &t)?;
            }
        }
        Ok(out)
    }

    fn div(&self, _a: &Vec<TowerElem>, _b: &Vec<TowerElem>) -> Result<Vec<TowerElem>> {
        Err(parse_err("division is not allowed in moduli"))
    }

    fn pow(&self, a: &Vec<TowerElem>, n: i64) -> Result<Vec<TowerElem>> {
        if n < 0 {
            return Err(parse_err("negative powers are not allowed in moduli"));
        }
        let mut acc = vec![self.field.one()];
        for _ in 0..n {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }
}

fn parse_stage_poly(
    field: &TowerField,
    vars: &BTreeMap<String, TowerElem>,
    new_var: &str,
    text: &str,
) -> Result<Vec<TowerElem>> {
    let toks = tokenize(text)?;
    let algebra = StagePolyAlgebra {
        field,
        vars,
        new_var,
    };
    let (v, used) = eval_expr(&algebra, &toks)?;
    if used != toks.len() {
        return Err(parse_err(format!("trailing input in modulus {text:?}")));
    }
    Ok(v)
}

/// Tower-element expressions: full field arithmetic with the tower's
/// named variables.
struct TowerAlgebra<'f> {
    field: &'f TowerField,
    vars: &'f BTreeMap<String, TowerElem>,
}

impl<'f> ExprAlgebra for TowerAlgebra<'f> {
    type Value = TowerElem;

    fn constant_int(&self, n: i64) -> Result<TowerElem> {
        Ok(self.field.from_int(n))
    }

    fn variable(&self, name: &str) -> Result<TowerElem> {
        self.vars
            .get(name)
            .cloned()
            .ok_or_else(|| parse_err(format!("unknown symbol {name}")))
    }

    fn add(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        self.field.add(a, b)
    }

    fn neg(&self, a: &TowerElem) -> Result<TowerElem> {
        self.field.neg(a)
    }

    fn mul(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        self.field.mul(a, b)
    }

    fn div(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem> {
        let binv = self.field.inv(b)?;
        self.field.mul(a, &binv)
    }

    fn pow(&self, a: &TowerElem, n: i64) -> Result<TowerElem> {
        let (base, n) = if n < 0 {
            (self.field.inv(a)?, -n)
        } else {
            (a.clone(), n)
        };
        let mut acc = self.field.one();
        for _ in 0..n {
            acc = self.field.mul(&acc, &base)?;
        }
        Ok(acc)
    }
}

pub fn parse_tower_element(tower: &ParsedTower, text: &str) -> Result<TowerElem> {
    let toks = tokenize(text)?;
    let algebra = TowerAlgebra {
        field: &tower.field,
        vars: &tower.variables,
    };
    let (v, used) = eval_expr(&algebra, &toks)?;
    if used != toks.len() {
        return Err(parse_err(format!("trailing input in {text:?}")));
    }
    Ok(v)
}

/// Parses a comma-separated element list `[a, b, c]` of tower elements.
pub fn parse_tower_domain(tower: &ParsedTower, text: &str) -> Result<Vec<TowerElem>> {
    let text = text.trim();
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| parse_err("domain must be bracketed"))?;
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '(' | '[' => {
                depth += 1;
                cur.push(c);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => {
                out.push(cur.clone());
                cur.clear();
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out.iter()
        .map(|e| parse_tower_element(tower, e))
        .collect()
}

/// Scalar expressions in a plain coefficient ring (used for rat_fun
/// domains in the CLI): variables `t` (the transcendental) only.
pub fn parse_ratfun_scalar(ring: &CoeffRing, text: &str) -> Result<RingScalar> {
    let CoeffRing::RatFun(_) = ring else {
        return Err(parse_err("expected a rational-function ring"));
    };
    struct RatAlgebra {
        ring: CoeffRing,
    }
    impl ExprAlgebra for RatAlgebra {
        type Value = RingScalar;
        fn constant_int(&self, n: i64) -> Result<RingScalar> {
            Ok(self.ring.from_int(n))
        }
        fn variable(&self, name: &str) -> Result<RingScalar> {
            match name {
                "t" => self.ring.fraction(vec![vec![], vec![1]], vec![vec![1]]),
                "x" => self
                    .ring
                    .fraction(vec![vec![0, 1]], vec![vec![1]]),
                _ => Err(parse_err(format!("unknown symbol {name}"))),
            }
        }
        fn add(&self, a: &RingScalar, b: &RingScalar) -> Result<RingScalar> {
            a.add(b)
        }
        fn neg(&self, a: &RingScalar) -> Result<RingScalar> {
            Ok(a.neg())
        }
        fn mul(&self, a: &RingScalar, b: &RingScalar) -> Result<RingScalar> {
            a.mul(b)
        }
        fn div(&self, a: &RingScalar, b: &RingScalar) -> Result<RingScalar> {
            a.mul(&b.inv()?)
        }
        fn pow(&self, a: &RingScalar, n: i64) -> Result<RingScalar> {
            let (base, n) = if n < 0 { (a.inv()?, -n) } else { (a.clone(), n) };
            let mut acc = self.ring.one();
            for _ in 0..n {
                acc = acc.mul(&base)?;
            }
            Ok(acc)
        }
    }
    let toks = tokenize(text)?;
    let algebra = RatAlgebra { ring: ring.clone() };
    let (v, used) = eval_expr(&algebra, &toks)?;
    if used != toks.len() {
        return Err(parse_err(format!("trailing input in {text:?}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::ScalarRepr;

    #[test]
    fn group_specs() {
        assert_eq!(parse_group_spec("C2").unwrap(), GroupSpec::Cyclic(2));
        assert_eq!(parse_group_spec("Z").unwrap(), GroupSpec::Cyclic(0));
        assert_eq!(parse_group_spec("Z^2").unwrap(), GroupSpec::FreeAbelian(2));
        assert_eq!(
            parse_group_spec("C2xC4").unwrap(),
            GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(4)])
        );
        let s3 = parse_group_spec("S3").unwrap();
        assert_eq!(Group::new(s3).unwrap().order(), Some(6));
        let p = parse_group_spec("perm:[(1 2),(1 2 3)]").unwrap();
        assert_eq!(Group::new(p).unwrap().order(), Some(6));
    }

    #[test]
    fn coeff_rings() {
        assert_eq!(parse_coeff_ring("Z").unwrap(), CoeffRing::Integers);
        assert_eq!(parse_coeff_ring("Z/4").unwrap(), CoeffRing::z_mod(4));
        assert_eq!(parse_coeff_ring("F2").unwrap(), make_gf(2, 1).unwrap());
        assert_eq!(parse_coeff_ring("F9").unwrap(), make_gf(3, 2).unwrap());
        assert_eq!(parse_coeff_ring("GF(2,2)").unwrap(), make_gf(2, 2).unwrap());
        assert!(matches!(
            parse_coeff_ring("F2(t)").unwrap(),
            CoeffRing::RatFun(_)
        ));
        assert!(parse_coeff_ring("F6").is_err());
    }

    #[test]
    fn ring_elements() {
        let ring = make_gf(2, 1).unwrap();
        let z = Group::infinite_cyclic();
        let e = parse_group_ring_element(&ring, &z, "1 + x^2").unwrap();
        assert_eq!(e.support().len(), 2);
        let e = parse_group_ring_element(&CoeffRing::Integers, &z, "3*x^-1").unwrap();
        assert_eq!(e.support().len(), 1);
        let ScalarRepr::Int(c) = &e.support()[0].1.repr else {
            panic!()
        };
        assert_eq!(*c, BigInt::from(3));
        let c2 = Group::cyclic(2);
        let e = parse_group_ring_element(&ring, &c2, "1 + g").unwrap();
        assert_eq!(e.support().len(), 2);
        // g^2 = 1 in C2.
        let e = parse_group_ring_element(&ring, &c2, "g^2").unwrap();
        assert!(e.is_one());
    }

    #[test]
    fn matrices_parse() {
        let ring = make_gf(2, 1).unwrap();
        let c2 = Group::cyclic(2);
        let m = parse_matrix(&ring, &c2, "[[1+g, 0],[g, 1]]").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.entry(0, 0).support().len(), 2);
        assert!(m.entry(1, 1).is_one());
        assert!(parse_matrix(&ring, &c2, "[[1,0],[1]]").is_err());
    }

    #[test]
    fn alphabets() {
        let a = parse_alphabet("F2").unwrap();
        assert_eq!(a.vector_space_tag(), Some((2, 1)));
        let a = parse_alphabet("F2^3").unwrap();
        assert_eq!(a.vector_space_tag(), Some((2, 3)));
        let a = parse_alphabet("Z/6").unwrap();
        assert_eq!(a.structure(), &[(2, 1, 1), (3, 1, 1)]);
        let a = parse_alphabet("Z/2+Z/4").unwrap();
        assert_eq!(a.structure(), &[(2, 1, 1), (2, 2, 1)]);
    }

    #[test]
    fn memory_lists() {
        let c3 = Group::cyclic(3);
        let a = parse_alphabet("F2").unwrap();
        let mem = parse_memory(&c3, &a, "[(0,[1]),(1,[1])]").unwrap();
        assert_eq!(mem.len(), 2);
        assert_eq!(mem[0].1, vec![vec![1]]);
        let a2 = parse_alphabet("F2^2").unwrap();
        let mem = parse_memory(&c3, &a2, "[(1,[[1,0],[0,1]])]").unwrap();
        assert_eq!(mem[0].1, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn towers() {
        let t = parse_tower(2, "[alg:x^2+x+1, transc]").unwrap();
        assert_eq!(t.steps.len(), 2);
        assert!(t.variables.contains_key("x"));
        assert!(t.variables.contains_key("t"));
        let elems = parse_tower_domain(&t, "[t, 1/t, x*t]").unwrap();
        assert_eq!(elems.len(), 3);
        // 1/t * t = 1.
        let prod = t.field.mul(&elems[0], &elems[1]).unwrap();
        assert_eq!(prod, t.field.one());
        // Reducible modulus is rejected.
        assert!(parse_tower(2, "[alg:x^2+1]").is_err());
    }

    #[test]
    fn malformed_inputs_error_cleanly() {
        let ring = make_gf(2, 1).unwrap();
        let c2 = Group::cyclic(2);
        for bad in ["1++2", "x^", "((1)", "[", "1 2", "y", "3*", "^2", ""] {
            assert!(
                parse_group_ring_element(&ring, &c2, bad).is_err(),
                "{bad:?} should not parse"
            );
        }
        for bad in ["C", "Cx", "Z^", "perm:[(0 1)]", "perm:[]", "Q8"] {
            assert!(parse_group_spec(bad).is_err(), "{bad:?} should not parse");
        }
        for bad in ["Z/1", "F0", "GF(4,1)", "F12"] {
            assert!(parse_coeff_ring(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn matrix_display_parse_roundtrip() {
        // Printed matrices over cyclic groups re-parse to themselves.
        let f2 = make_gf(2, 1).unwrap();
        let c2 = Group::cyclic(2);
        let m = parse_matrix(&f2, &c2, "[[1+g, 0],[g, 1]]").unwrap();
        assert_eq!(parse_matrix(&f2, &c2, &m.to_string()).unwrap(), m);
        let z = Group::infinite_cyclic();
        let zr = CoeffRing::Integers;
        let m = parse_matrix(&zr, &z, "[[1 - x^3, 3*x^-1],[0, -2]]").unwrap();
        assert_eq!(parse_matrix(&zr, &z, &m.to_string()).unwrap(), m);
    }

    #[test]
    fn ratfun_scalars() {
        let ring = parse_coeff_ring("F2(t)").unwrap();
        let e = parse_ratfun_scalar(&ring, "1/(t+1)").unwrap();
        let inv = e.inv().unwrap();
        let expected = parse_ratfun_scalar(&ring, "t+1").unwrap();
        assert_eq!(inv, expected);
    }
}
