//! Sparse truncated series in `Z[Q + M] / I^k`.
//!
//! `Q` is a free commutative monoid whose generators carry positive degrees; a monomial
//! `t^q z^m` survives truncation at order `k` iff the degree-weighted size of `q` is
//! below `k`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("ring contexts differ: {0:?} vs {1:?}")]
    Mismatch(Context, Context),
    #[error("constant term {0} is not a unit")]
    NonUnitConstant(BigInt),
    #[error("term z^{0:?} has curve-class order 0 but is not the constant term")]
    OrderZeroTerm(Vec<i64>),
    #[error("exponent length {got} does not match {expected}")]
    Shape { expected: usize, got: usize },
    #[error("lattice exponent {0:?} collects terms of several curve-class orders")]
    MixedOrders(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClassMonoid {
    pub generators: Vec<String>,
    pub degrees: Vec<u32>,
    /// Row per generator: intersection numbers with the boundary divisors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor_pairing: Option<Vec<Vec<i64>>>,
}

impl CurveClassMonoid {
    pub fn new(generators: &[&str]) -> Self {
        CurveClassMonoid {
            generators: generators.iter().map(|s| s.to_string()).collect(),
            degrees: vec![1; generators.len()],
            divisor_pairing: None,
        }
    }

    pub fn empty() -> Self {
        CurveClassMonoid::new(&[])
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.degrees.len() != self.generators.len() {
            return Err("monoid.degrees: length differs from generators".into());
        }
        if self.degrees.contains(&0) {
            return Err("monoid.degrees: every degree must be at least 1".into());
        }
        if let Some(p) = &self.divisor_pairing {
            if p.len() != self.generators.len() {
                return Err("monoid.divisor_pairing: one row per generator expected".into());
            }
        }
        Ok(())
    }

    pub fn order(&self, q: &[u32]) -> u32 {
        q.iter().zip(&self.degrees).map(|(a, d)| a * d).sum()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }
}

/// Everything two series must share to be combined.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Context {
    pub degrees: Vec<u32>,
    pub rank: usize,
    pub order: u32,
}

impl Context {
    pub fn new(monoid: &CurveClassMonoid, rank: usize, order: u32) -> Arc<Context> {
        Arc::new(Context {
            degrees: monoid.degrees.clone(),
            rank,
            order,
        })
    }

    pub fn q_order(&self, q: &[u32]) -> u32 {
        q.iter().zip(&self.degrees).map(|(a, d)| a * d).sum()
    }

    pub fn with_order(&self, order: u32) -> Arc<Context> {
        Arc::new(Context {
            order,
            ..self.clone()
        })
    }

    pub fn with_rank(&self, rank: usize) -> Arc<Context> {
        Arc::new(Context {
            rank,
            ..self.clone()
        })
    }

    pub fn zero_q(&self) -> Vec<u32> {
        vec![0; self.degrees.len()]
    }
}

/// Sort key of a term: curve-class order first, then `q`, then `m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub ord: u32,
    pub q: Vec<u32>,
    pub m: Vec<i64>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    ctx: Arc<Context>,
    terms: BTreeMap<Monomial, BigInt>,
}

impl TruncatedSeries {
    pub fn zero(ctx: &Arc<Context>) -> Self {
        TruncatedSeries {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, BigInt::one(), ctx.zero_q(), vec![0; ctx.rank])
    }

    pub fn monomial(ctx: &Arc<Context>, c: BigInt, q: Vec<u32>, m: Vec<i64>) -> Self {
        let mut s = Self::zero(ctx);
        s.add_term(c, q, m);
        s
    }

    /// `z^m`.
    pub fn character(ctx: &Arc<Context>, m: &[i64]) -> Self {
        Self::monomial(ctx, BigInt::one(), ctx.zero_q(), m.to_vec())
    }

    pub fn from_terms<I>(ctx: &Arc<Context>, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<i64>, BigInt)>,
    {
        let mut s = Self::zero(ctx);
        for (q, m, c) in terms {
            if q.len() != ctx.degrees.len() {
                return Err(SeriesError::Shape {
                    expected: ctx.degrees.len(),
                    got: q.len(),
                });
            }
            if m.len() != ctx.rank {
                return Err(SeriesError::Shape {
                    expected: ctx.rank,
                    got: m.len(),
                });
            }
            s.add_term(c, q, m);
        }
        Ok(s)
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn order(&self) -> u32 {
        self.ctx.order
    }

    /// Adds `c t^q z^m`, dropping it if it lies in `I^k`.
    pub fn add_term(&mut self, c: BigInt, q: Vec<u32>, m: Vec<i64>) {
        let ord = self.ctx.q_order(&q);
        if ord >= self.ctx.order || c.is_zero() {
            return;
        }
        let key = Monomial { ord, q, m };
        let slot = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(k, c)| k.ord == 0 && k.m.iter().all(|x| *x == 0) && c.is_one())
    }

    pub fn coefficient(&self, q: &[u32], m: &[i64]) -> BigInt {
        let key = Monomial {
            ord: self.ctx.q_order(q),
            q: q.to_vec(),
            m: m.to_vec(),
        };
        self.terms.get(&key).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coefficient(&self.ctx.zero_q(), &vec![0; self.ctx.rank])
    }

    /// Lowest curve-class order carrying a term, if any.
    pub fn min_order(&self) -> Option<u32> {
        self.terms.keys().next().map(|k| k.ord)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.ctx != other.ctx && *self.ctx != *other.ctx {
            return Err(SeriesError::Mismatch(
                (*self.ctx).clone(),
                (*other.ctx).clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(c.clone(), k.q.clone(), k.m.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (k, c) in &self.terms {
            out.add_term(c * s, k.q.clone(), k.m.clone());
        }
        out
    }

    /// Multiplies by `c t^q z^m`.
    pub fn mul_monomial(&self, c: &BigInt, q: &[u32], m: &[i64]) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (k, a) in &self.terms {
            let nq: Vec<u32> = k.q.iter().zip(q).map(|(x, y)| x + y).collect();
            let nm: Vec<i64> = k.m.iter().zip(m).map(|(x, y)| x + y).collect();
            out.add_term(a * c, nq, nm);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let k = self.ctx.order;
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                // both maps are sorted by order, so the inner loop can stop early
                if ka.ord + kb.ord >= k {
                    break;
                }
                let key = Monomial {
                    ord: ka.ord + kb.ord,
                    q: ka.q.iter().zip(&kb.q).map(|(x, y)| x + y).collect(),
                    m: ka.m.iter().zip(&kb.m).map(|(x, y)| x + y).collect(),
                };
                *acc.entry(key).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(TruncatedSeries {
            ctx: self.ctx.clone(),
            terms: acc,
        })
    }

    fn unit_split(&self) -> Result<(BigInt, Self), SeriesError> {
        let u = self.constant_term();
        if !(u.is_one() || (-&u).is_one()) {
            return Err(SeriesError::NonUnitConstant(u));
        }
        let mut h = self.clone();
        h.add_term(-&u, self.ctx.zero_q(), vec![0; self.ctx.rank]);
        if let Some((k, _)) = h.terms.iter().find(|(k, _)| k.ord == 0) {
            return Err(SeriesError::OrderZeroTerm(k.m.clone()));
        }
        Ok((u, h))
    }

    /// Inverse of `u + h` with `u = ±1` and `h` in the ideal: `u⁻¹ Σ (−u⁻¹h)^j`.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let (u, h) = self.unit_split()?;
        // u is ±1, so it is its own inverse
        let step = h.scale(&-&u);
        let mut power = Self::one(&self.ctx);
        let mut sum = Self::one(&self.ctx);
        for _ in 1..self.ctx.order.max(1) {
            power = power.mul(&step)?;
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power)?;
        }
        Ok(sum.scale(&u))
    }

    pub fn pow(&self, n: i64) -> Result<Self, SeriesError> {
        if n < 0 {
            return self.invert()?.pow(-n);
        }
        let mut base = self.clone();
        let mut out = Self::one(&self.ctx);
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    /// Re-truncates at a (usually lower) order.
    pub fn truncate(&self, order: u32) -> Self {
        let ctx = self.ctx.with_order(order);
        let mut out = Self::zero(&ctx);
        for (k, c) in &self.terms {
            out.add_term(c.clone(), k.q.clone(), k.m.clone());
        }
        out
    }

    /// Moves the series into another context with the same monoid and rank.
    pub fn recontext(&self, ctx: &Arc<Context>) -> Result<Self, SeriesError> {
        if ctx.degrees != self.ctx.degrees || ctx.rank != self.ctx.rank {
            return Err(SeriesError::Mismatch(
                (*self.ctx).clone(),
                (**ctx).clone(),
            ));
        }
        let mut out = Self::zero(ctx);
        for (k, c) in &self.terms {
            out.add_term(c.clone(), k.q.clone(), k.m.clone());
        }
        Ok(out)
    }

    /// Applies `f` to every term; terms that `f` drops vanish.
    pub fn map_terms<F>(&self, ctx: &Arc<Context>, mut f: F) -> Self
    where
        F: FnMut(&Monomial, &BigInt) -> Option<(Vec<u32>, Vec<i64>, BigInt)>,
    {
        let mut out = Self::zero(ctx);
        for (k, c) in &self.terms {
            if let Some((q, m, c)) = f(k, c) {
                out.add_term(c, q, m);
            }
        }
        out
    }

    /// Sends every `t^q` to 1.
    pub fn set_classes_to_zero(&self) -> LatticeSum {
        let mut out: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
        let mut orders: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
        let mut mixed = std::collections::BTreeSet::new();
        for (k, c) in &self.terms {
            *out.entry(k.m.clone()).or_insert_with(BigInt::zero) += c;
            match orders.get(&k.m) {
                Some(o) if *o != k.ord => {
                    mixed.insert(k.m.clone());
                }
                _ => {
                    orders.insert(k.m.clone(), k.ord);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        LatticeSum {
            terms: out,
            mixed_orders: mixed.into_iter().collect(),
        }
    }

    /// As [`set_classes_to_zero`](Self::set_classes_to_zero) but refuses exponents fed by
    /// several curve-class orders.
    pub fn set_classes_to_zero_strict(&self) -> Result<LatticeSum, SeriesError> {
        let s = self.set_classes_to_zero();
        match s.mixed_orders.first() {
            Some(m) => Err(SeriesError::MixedOrders(m.clone())),
            None => Ok(s),
        }
    }

    /// Terms whose lattice exponent is `m`, as a rank-0 series.
    pub fn coefficient_of_character(&self, m: &[i64]) -> TruncatedSeries {
        let ctx = self.ctx.with_rank(0);
        let mut out = TruncatedSeries::zero(&ctx);
        for (k, c) in &self.terms {
            if k.m == m {
                out.add_term(c.clone(), k.q.clone(), vec![]);
            }
        }
        out
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(k, c)| TermRecord {
                q: k.q.clone(),
                m: k.m.clone(),
                c: c.clone(),
            })
            .collect()
    }

    pub fn from_records(ctx: &Arc<Context>, recs: &[TermRecord]) -> Result<Self, SeriesError> {
        Self::from_terms(
            ctx,
            recs.iter().map(|r| (r.q.clone(), r.m.clone(), r.c.clone())),
        )
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> SeriesDisplay<'a> {
        SeriesDisplay { s: self, names }
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.ctx.degrees.len()).map(|i| format!("t{i}")).collect();
        write!(f, "{} (mod I^{})", self.display_with(&names), self.ctx.order)
    }
}

pub struct SeriesDisplay<'a> {
    s: &'a TruncatedSeries,
    names: &'a [String],
}

impl fmt::Display for SeriesDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.s.terms.iter().enumerate() {
            let mut factors = vec![];
            for (j, e) in k.q.iter().enumerate() {
                let name = self.names.get(j).cloned().unwrap_or_else(|| format!("t{}", j + 1));
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if k.m.iter().any(|x| *x != 0) {
                let parts: Vec<String> = k.m.iter().map(|x| x.to_string()).collect();
                factors.push(format!("z^({})", parts.join(",")));
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A formal sum over lattice exponents, produced by forgetting curve classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub terms: BTreeMap<Vec<i64>, BigInt>,
    /// Exponents whose coefficient mixes several curve-class orders.
    pub mixed_orders: Vec<Vec<i64>>,
}

/// One serialized term `c t^q z^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub q: Vec<u32>,
    pub m: Vec<i64>,
    #[serde(with = "crate::interface::bigint_serde")]
    pub c: BigInt,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(k: u32) -> Arc<Context> {
        Context::new(&CurveClassMonoid::new(&["t"]), 2, k)
    }

    fn s(ctx: &Arc<Context>, terms: &[(u32, [i64; 2], i64)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            ctx,
            terms.iter().map(|(q, m, c)| (vec![*q], m.to_vec(), BigInt::from(*c))),
        )
        .unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let c = ctx(3);
        let a = s(&c, &[(0, [0, 0], 1), (1, [1, 0], 1)]);
        let b = s(&c, &[(0, [0, 0], 1), (1, [1, 0], -1)]);
        assert_eq!(a.mul(&b).unwrap(), s(&c, &[(0, [0, 0], 1), (2, [2, 0], -1)]));
        assert_eq!(a.mul(&TruncatedSeries::one(&c)).unwrap(), a);
    }

    #[test]
    fn truncation_drops_square() {
        let c = ctx(2);
        let a = s(&c, &[(0, [0, 0], 1), (1, [1, 0], 1)]);
        assert_eq!(a.pow(2).unwrap(), s(&c, &[(0, [0, 0], 1), (1, [1, 0], 2)]));
    }

    #[test]
    fn inverse_is_geometric_series() {
        let c = ctx(3);
        let a = s(&c, &[(0, [0, 0], 1), (1, [1, 0], 1)]);
        let inv = a.invert().unwrap();
        assert_eq!(inv, s(&c, &[(0, [0, 0], 1), (1, [1, 0], -1), (2, [2, 0], 1)]));
        assert!(a.mul(&inv).unwrap().is_one());
        assert!(TruncatedSeries::one(&c).invert().unwrap().is_one());
        let neg_unit = s(&c, &[(0, [0, 0], -1), (1, [0, 1], 3)]);
        assert!(neg_unit.mul(&neg_unit.invert().unwrap()).unwrap().is_one());
    }

    #[test]
    fn invert_rejects_non_units() {
        let c = ctx(3);
        let x = s(&c, &[(0, [1, 0], 1)]);
        assert!(matches!(x.invert(), Err(SeriesError::NonUnitConstant(_))));
        let y = s(&c, &[(0, [0, 0], 1), (0, [1, 0], 1)]);
        assert!(matches!(y.invert(), Err(SeriesError::OrderZeroTerm(_))));
        let two = s(&c, &[(0, [0, 0], 2)]);
        assert!(two.invert().is_err());
    }

    #[test]
    fn powers() {
        let c = ctx(3);
        let a = s(&c, &[(0, [0, 0], 1), (1, [0, 1], 1)]);
        assert_eq!(
            a.pow(2).unwrap(),
            s(&c, &[(0, [0, 0], 1), (1, [0, 1], 2), (2, [0, 2], 1)])
        );
        assert!(a.pow(0).unwrap().is_one());
        let c2 = ctx(2);
        let b = s(&c2, &[(0, [0, 0], 1), (1, [0, 1], 1)]);
        assert_eq!(b.pow(-1).unwrap(), s(&c2, &[(0, [0, 0], 1), (1, [0, 1], -1)]));
    }

    #[test]
    fn forgetting_classes() {
        let m = CurveClassMonoid::new(&["t1", "t2"]);
        let c = Context::new(&m, 2, 4);
        let f = TruncatedSeries::from_terms(
            &c,
            vec![
                (vec![0, 0], vec![0, 0], BigInt::one()),
                (vec![1, 1], vec![1, 1], BigInt::one()),
            ],
        )
        .unwrap();
        let z = f.set_classes_to_zero();
        assert_eq!(z.terms.get(&vec![1, 1]), Some(&BigInt::one()));
        assert_eq!(z.terms.get(&vec![0, 0]), Some(&BigInt::one()));
        let c1 = ctx(4);
        let g = s(&c1, &[(1, [1, 0], 1), (2, [1, 0], 1)]);
        let zg = g.set_classes_to_zero();
        assert_eq!(zg.terms.get(&vec![1, 0]), Some(&BigInt::from(2)));
        assert_eq!(zg.mixed_orders, vec![vec![1, 0]]);
        assert!(g.set_classes_to_zero_strict().is_err());
    }

    #[test]
    fn mismatched_contexts_fail() {
        let a = TruncatedSeries::one(&ctx(2));
        let b = TruncatedSeries::one(&ctx(3));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn display_is_readable() {
        let c = ctx(3);
        let a = s(&c, &[(0, [0, 0], 1), (1, [1, 0], -2)]);
        let names = vec!["t".to_string()];
        assert_eq!(a.display_with(&names).to_string(), "1 - 2*t*z^(1,0)");
    }
}
