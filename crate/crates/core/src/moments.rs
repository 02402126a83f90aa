//! Exact expectations of products of sample means,
//! `nu(k, l) = E[Xbar^k (X2bar)^l]` and `rho(i, j) = E[Xbar^i Xbar_s^j]`
//! with `Xbar_s = X2bar - sigma^2`, as polynomials in `1/n`.
//!
//! Expanding the product of sample means over observation indices, the
//! expectation of each index pattern factorizes over the distinct indices.
//! Patterns are set partitions of the factor slots: a partition with `b`
//! blocks occurs `n (n-1) ... (n-b+1)` times and contributes the product of
//! its block moments, all divided by `n^(k+l)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::rational::{self, Rational};
use crate::algebra::{AlgebraError, SparsePoly, Symbol};

/// Default bound on the number of factor slots.
pub const DEFAULT_SLOT_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MomentsError {
    #[error(
        "{slots} factor slots exceed the enumeration cap of {cap} \
         (Bell({slots}) = {bell} set partitions before pruning)"
    )]
    CapExceeded { slots: usize, cap: usize, bell: BigInt },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sample {
    X,
    Y,
}

impl Sample {
    pub fn moment(self, j: u8) -> Symbol {
        match self {
            Sample::X => Symbol::MomentX(j),
            Sample::Y => Symbol::MomentY(j),
        }
    }
}

/// Which product of sample means to take the expectation of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlotSpec {
    /// Number of `Xbar` factors.
    pub count1: usize,
    /// Number of `X2bar` (or `Xbar_s`) factors.
    pub count2: usize,
    /// Weight-two slots hold `X^2 - sigma^2` instead of `X^2`.
    pub centered2: bool,
}

impl SlotSpec {
    pub fn slots(&self) -> usize {
        self.count1 + self.count2
    }
}

/// `sum_v n^(-v) coeff_v`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentPolynomial {
    terms: BTreeMap<u32, SparsePoly>,
}

impl MomentPolynomial {
    pub fn constant(c: SparsePoly) -> Self {
        let mut p = Self::default();
        p.add_at(0, c);
        p
    }

    pub fn coeff(&self, v: u32) -> SparsePoly {
        self.terms.get(&v).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &SparsePoly)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Powers `v` carrying a nonzero coefficient.
    pub fn powers(&self) -> Vec<u32> {
        self.terms.keys().copied().collect()
    }

    fn add_at(&mut self, v: u32, c: SparsePoly) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(v).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add(&self, other: &MomentPolynomial) -> MomentPolynomial {
        let mut out = self.clone();
        for (&v, c) in &other.terms {
            out.add_at(v, c.clone());
        }
        out
    }

    pub fn scale_poly(&self, c: &SparsePoly) -> MomentPolynomial {
        let mut out = MomentPolynomial::default();
        for (&v, x) in &self.terms {
            out.add_at(v, x * c);
        }
        out
    }

    pub fn map_symbols(&self, f: impl Fn(Symbol) -> Symbol + Copy) -> MomentPolynomial {
        MomentPolynomial { terms: self.terms.iter().map(|(&v, c)| (v, c.map_symbols(f))).collect() }
    }

    /// Drops powers above `v_max`.
    pub fn truncated(&self, v_max: u32) -> MomentPolynomial {
        MomentPolynomial { terms: self.terms.range(..=v_max).map(|(&v, c)| (v, c.clone())).collect() }
    }

    pub fn substitute(&self, sym: Symbol, value: &SparsePoly) -> Result<Self, AlgebraError> {
        let mut out = MomentPolynomial::default();
        for (&v, c) in &self.terms {
            out.add_at(v, c.substitute(sym, value)?);
        }
        Ok(out)
    }

    pub fn eval_rational(
        &self,
        n: &Rational,
        env: impl Fn(Symbol) -> Option<Rational> + Copy,
    ) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        for (&v, c) in &self.terms {
            total += c.eval_rational(env)? / rational::powi(n, v as i32);
        }
        Ok(total)
    }
}

/// Visits every set partition of `slots` labelled elements once, as a
/// restricted growth string (block index per slot) plus the block count.
pub fn enumerate_partitions(slots: usize, visitor: impl FnMut(&[usize], usize)) {
    enumerate_partitions_pruned(slots, |_| false, 0, visitor);
}

/// Like [`enumerate_partitions`], skipping every partition that has a
/// singleton block made of a slot for which `vanishing_singleton` holds, or
/// fewer than `min_blocks` blocks. Pruned subtrees are never expanded.
pub fn enumerate_partitions_pruned(
    slots: usize,
    vanishing_singleton: impl Fn(usize) -> bool,
    min_blocks: usize,
    visitor: impl FnMut(&[usize], usize),
) {
    let mut walk = Walk {
        slots,
        vanishing: vanishing_singleton,
        min_blocks,
        rgs: Vec::with_capacity(slots),
        sizes: Vec::with_capacity(slots),
        firsts: Vec::with_capacity(slots),
        pending: 0,
        visitor,
    };
    walk.step();
}

struct Walk<V, F> {
    slots: usize,
    vanishing: V,
    min_blocks: usize,
    rgs: Vec<usize>,
    sizes: Vec<usize>,
    firsts: Vec<usize>,
    /// Singleton blocks whose only slot vanishes alone.
    pending: usize,
    visitor: F,
}

impl<V: Fn(usize) -> bool, F: FnMut(&[usize], usize)> Walk<V, F> {
    fn step(&mut self) {
        let i = self.rgs.len();
        let blocks = self.sizes.len();
        let remaining = self.slots - i;
        if self.pending > remaining || blocks + remaining - self.pending < self.min_blocks {
            return;
        }
        if remaining == 0 {
            (self.visitor)(&self.rgs, blocks);
            return;
        }
        for b in 0..blocks {
            self.rgs.push(b);
            self.sizes[b] += 1;
            let fixed = self.sizes[b] == 2 && (self.vanishing)(self.firsts[b]);
            if fixed {
                self.pending -= 1;
            }
            self.step();
            if fixed {
                self.pending += 1;
            }
            self.sizes[b] -= 1;
            self.rgs.pop();
        }
        let vanish = (self.vanishing)(i);
        self.rgs.push(blocks);
        self.sizes.push(1);
        self.firsts.push(i);
        if vanish {
            self.pending += 1;
        }
        self.step();
        if vanish {
            self.pending -= 1;
        }
        self.firsts.pop();
        self.sizes.pop();
        self.rgs.pop();
    }
}

/// Bell number `B(n)`, for error messages and tests.
pub fn bell(n: usize) -> BigInt {
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().expect("nonempty").clone());
        for x in &row {
            let v = next.last().expect("nonempty") + x;
            next.push(v);
        }
        row = next;
    }
    row[0].clone()
}

/// Signed Stirling numbers of the first kind `s(b, k)`, `0 <= k <= b <= max`.
fn stirling_first(max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::one()]];
    for b in 0..max {
        let prev = &s[b];
        let mut row = vec![BigInt::zero(); b + 2];
        for (k, x) in prev.iter().enumerate() {
            row[k + 1] += x;
            row[k] -= x * BigInt::from(b);
        }
        s.push(row);
    }
    s
}

type Memo = HashMap<(usize, usize, bool), (Option<u32>, Arc<MomentPolynomial>)>;

/// Memoizing evaluator for `nu` and `rho`. Results are computed over the
/// `x`-sample moment symbols and renamed for the `y` sample.
///
/// Safe to share across threads; concurrent callers may duplicate work but
/// always observe complete entries.
pub struct MomentEngine {
    cap: usize,
    stirling: Vec<Vec<BigInt>>,
    memo: RwLock<Memo>,
}

impl Default for MomentEngine {
    fn default() -> Self {
        Self::new(DEFAULT_SLOT_CAP)
    }
}

impl MomentEngine {
    pub fn new(cap: usize) -> Self {
        MomentEngine { cap, stirling: stirling_first(cap), memo: RwLock::new(HashMap::new()) }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of memoized `(count1, count2, centered)` entries.
    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    pub fn memo_keys(&self) -> Vec<(usize, usize, bool, Option<u32>, usize)> {
        let memo = self.memo.read().expect("memo lock");
        let mut keys: Vec<_> =
            memo.iter().map(|(&(a, b, c), (v, p))| (a, b, c, *v, p.terms().map(|(_, t)| t.len()).sum())).collect();
        keys.sort();
        keys
    }

    /// `E[Xbar^k (X2bar)^l]` for the given sample.
    pub fn nu(&self, k: usize, l: usize, sample: Sample) -> Result<MomentPolynomial, MomentsError> {
        let spec = SlotSpec { count1: k, count2: l, centered2: false };
        let p = self.expectation(spec, None)?;
        Ok(rename(&p, sample))
    }

    /// `E[Xbar^i Xbar_s^j]` for the given sample, with `sigma^2 = mu_2`.
    pub fn rho(&self, i: usize, j: usize, sample: Sample) -> Result<MomentPolynomial, MomentsError> {
        let spec = SlotSpec { count1: i, count2: j, centered2: true };
        let p = self.expectation(spec, None)?;
        Ok(rename(&p, sample))
    }

    /// `rho(i, j)` restricted to powers `n^(-v)` with `v <= v_max`.
    pub fn rho_truncated(
        &self,
        i: usize,
        j: usize,
        sample: Sample,
        v_max: u32,
    ) -> Result<MomentPolynomial, MomentsError> {
        let spec = SlotSpec { count1: i, count2: j, centered2: true };
        let p = self.expectation(spec, Some(v_max))?;
        Ok(rename(&p, sample).truncated(v_max))
    }

    /// Expectation over `x`-sample symbols, keeping only `v <= v_max` when
    /// given. Memoized.
    pub fn expectation(&self, spec: SlotSpec, v_max: Option<u32>) -> Result<Arc<MomentPolynomial>, MomentsError> {
        let slots = spec.slots();
        if slots > self.cap {
            return Err(MomentsError::CapExceeded { slots, cap: self.cap, bell: bell(slots) });
        }
        let key = (spec.count1, spec.count2, spec.centered2);
        if let Some((have, poly)) = self.memo.read().expect("memo lock").get(&key) {
            let covers = match (have, v_max) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(h), Some(w)) => *h >= w,
            };
            if covers {
                return Ok(Arc::clone(poly));
            }
        }
        let poly = Arc::new(self.compute(spec, v_max));
        let mut memo = self.memo.write().expect("memo lock");
        let replace = match memo.get(&key) {
            None => true,
            Some((None, _)) => false,
            Some((Some(h), _)) => v_max.is_none_or(|w| w > *h),
        };
        if replace {
            memo.insert(key, (v_max, Arc::clone(&poly)));
        }
        Ok(poly)
    }

    fn compute(&self, spec: SlotSpec, v_max: Option<u32>) -> MomentPolynomial {
        let slots = spec.slots();
        let (count1, centered) = (spec.count1, spec.centered2);
        // Singletons vanish: E[X] = 0 and E[X^2 - sigma^2] = 0.
        let vanishing = move |slot: usize| slot < count1 || centered;
        let min_blocks = match v_max {
            Some(v) => slots.saturating_sub(v as usize),
            None => 0,
        };
        let mut shapes: HashMap<Vec<(u8, u8)>, u64> = HashMap::new();
        let mut blocks_buf: Vec<(u8, u8)> = Vec::new();
        enumerate_partitions_pruned(slots, vanishing, min_blocks, |rgs, nblocks| {
            blocks_buf.clear();
            blocks_buf.resize(nblocks, (0, 0));
            for (slot, &b) in rgs.iter().enumerate() {
                if slot < count1 {
                    blocks_buf[b].0 += 1;
                } else {
                    blocks_buf[b].1 += 1;
                }
            }
            let mut key = blocks_buf.clone();
            key.sort_unstable();
            *shapes.entry(key).or_insert(0) += 1;
        });

        let mut block_cache: HashMap<(u8, u8), SparsePoly> = HashMap::new();
        let mut out = MomentPolynomial::default();
        let mut shapes: Vec<_> = shapes.into_iter().collect();
        shapes.sort();
        for (shape, count) in shapes {
            let mut product = SparsePoly::constant(Rational::from_integer(BigInt::from(count)));
            for &(a, c) in &shape {
                let bm = block_cache.entry((a, c)).or_insert_with(|| block_moment(a, c, centered));
                product = &product * bm;
                if product.is_zero() {
                    break;
                }
            }
            if product.is_zero() {
                continue;
            }
            let b = shape.len();
            for (k, s) in self.stirling[b].iter().enumerate() {
                if s.is_zero() {
                    continue;
                }
                let v = (slots - k) as u32;
                if v_max.is_some_and(|m| v > m) {
                    continue;
                }
                out.add_at(v, product.scale(&Rational::from_integer(s.clone())));
            }
        }
        out
    }
}

/// `E[X^a Z^c]` with `Z = X^2` or `Z = X^2 - mu_2`, in `x` symbols.
fn block_moment(a: u8, c: u8, centered: bool) -> SparsePoly {
    let raw = |j: u8| -> SparsePoly {
        match j {
            0 => SparsePoly::one(),
            1 => SparsePoly::zero(),
            j => SparsePoly::var(Symbol::MomentX(j)),
        }
    };
    if !centered {
        return raw(a + 2 * c);
    }
    let neg_mu2 = -SparsePoly::var(Symbol::MomentX(2));
    let mut total = SparsePoly::zero();
    for d in 0..=c {
        let binom = Rational::from_integer(rational::binomial(u32::from(c), u32::from(d)));
        let term = &neg_mu2.pow(u32::from(c - d)) * &raw(a + 2 * d);
        total += &term.scale(&binom);
    }
    total
}

fn rename(p: &MomentPolynomial, sample: Sample) -> MomentPolynomial {
    match sample {
        Sample::X => p.clone(),
        Sample::Y => p.map_symbols(Symbol::swap_samples),
    }
}

/// `nu(k, l)` with the default engine configuration (not memoized across calls).
pub fn nu(k: usize, l: usize, sample: Sample) -> Result<MomentPolynomial, MomentsError> {
    MomentEngine::default().nu(k, l, sample)
}

/// `rho(i, j)` with the default engine configuration.
pub fn rho(i: usize, j: usize, sample: Sample) -> Result<MomentPolynomial, MomentsError> {
    MomentEngine::default().rho(i, j, sample)
}
