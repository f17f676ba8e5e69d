use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::field::FieldContext;
use crate::error::{Error, Result};

/// Coefficient ring of a q-expansion.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Field(FieldContext),
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Field(ctx) => write!(f, "{ctx}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Coeffs {
    Integer(Vec<BigInt>),
    Residue(FieldContext, Vec<u64>),
}

/// A power series `sum a_n q^n` known modulo `q^prec`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QExpansion {
    coeffs: Coeffs,
}

impl QExpansion {
    pub fn integer(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::precision(1, 0));
        }
        Ok(QExpansion { coeffs: Coeffs::Integer(coeffs) })
    }

    pub fn from_i64s(coeffs: &[i64]) -> Result<Self> {
        Self::integer(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Residue series; entries are reduced into `[0, p)`.
    pub fn residue(ctx: FieldContext, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::precision(1, 0));
        }
        let p = ctx.p();
        let coeffs = coeffs.into_iter().map(|c| c % p).collect();
        Ok(QExpansion { coeffs: Coeffs::Residue(ctx, coeffs) })
    }

    pub fn residue_from_i64s(ctx: FieldContext, coeffs: &[i64]) -> Result<Self> {
        Self::residue(ctx, coeffs.iter().map(|&c| ctx.from_i64(c)).collect())
    }

    pub fn zero(ring: Ring, prec: usize) -> Result<Self> {
        match ring {
            Ring::Integers => Self::integer(vec![BigInt::zero(); prec]),
            Ring::Field(ctx) => Self::residue(ctx, vec![0; prec]),
        }
    }

    pub fn one(ring: Ring, prec: usize) -> Result<Self> {
        let mut f = Self::zero(ring, prec)?;
        f.set_unit_at(0);
        Ok(f)
    }

    /// `q^n` to precision `prec` (zero when `n >= prec`).
    pub fn monomial(ring: Ring, n: usize, prec: usize) -> Result<Self> {
        let mut f = Self::zero(ring, prec)?;
        if n < prec {
            f.set_unit_at(n);
        }
        Ok(f)
    }

    fn set_unit_at(&mut self, n: usize) {
        match &mut self.coeffs {
            Coeffs::Integer(v) => v[n] = BigInt::one(),
            Coeffs::Residue(_, v) => v[n] = 1,
        }
    }

    pub fn ring(&self) -> Ring {
        match &self.coeffs {
            Coeffs::Integer(_) => Ring::Integers,
            Coeffs::Residue(ctx, _) => Ring::Field(*ctx),
        }
    }

    pub fn ctx(&self) -> Option<FieldContext> {
        match &self.coeffs {
            Coeffs::Integer(_) => None,
            Coeffs::Residue(ctx, _) => Some(*ctx),
        }
    }

    pub fn prec(&self) -> usize {
        match &self.coeffs {
            Coeffs::Integer(v) => v.len(),
            Coeffs::Residue(_, v) => v.len(),
        }
    }

    pub fn residues(&self) -> Option<&[u64]> {
        match &self.coeffs {
            Coeffs::Residue(_, v) => Some(v),
            Coeffs::Integer(_) => None,
        }
    }

    pub fn integers(&self) -> Option<&[BigInt]> {
        match &self.coeffs {
            Coeffs::Integer(v) => Some(v),
            Coeffs::Residue(..) => None,
        }
    }

    /// Coefficient `a_n` as an integer (residues are returned in `[0, p)`).
    pub fn coeff(&self, n: usize) -> Result<BigInt> {
        if n >= self.prec() {
            return Err(Error::precision(n + 1, self.prec()));
        }
        Ok(match &self.coeffs {
            Coeffs::Integer(v) => v[n].clone(),
            Coeffs::Residue(_, v) => BigInt::from(v[n]),
        })
    }

    pub fn is_zero(&self) -> bool {
        match &self.coeffs {
            Coeffs::Integer(v) => v.iter().all(Zero::is_zero),
            Coeffs::Residue(_, v) => v.iter().all(|&c| c == 0),
        }
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        match &self.coeffs {
            Coeffs::Integer(v) => v.iter().position(|c| !c.is_zero()),
            Coeffs::Residue(_, v) => v.iter().position(|&c| c != 0),
        }
    }

    pub fn truncate(&self, prec: usize) -> Result<Self> {
        if prec > self.prec() {
            return Err(Error::precision(prec, self.prec()));
        }
        if prec == 0 {
            return Err(Error::precision(1, 0));
        }
        Ok(QExpansion {
            coeffs: match &self.coeffs {
                Coeffs::Integer(v) => Coeffs::Integer(v[..prec].to_vec()),
                Coeffs::Residue(ctx, v) => Coeffs::Residue(*ctx, v[..prec].to_vec()),
            },
        })
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring() != other.ring() {
            return Err(Error::RingMismatch(self.ring().to_string(), other.ring().to_string()));
        }
        Ok(())
    }

    /// Product modulo `q^min(prec_f, prec_g)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.prec().min(other.prec());
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Integer(a), Coeffs::Integer(b)) => {
                let mut out = vec![BigInt::zero(); n];
                for (i, ai) in a.iter().take(n).enumerate() {
                    if ai.is_zero() {
                        continue;
                    }
                    for (j, bj) in b.iter().take(n - i).enumerate() {
                        if !bj.is_zero() {
                            out[i + j] += ai * bj;
                        }
                    }
                }
                Coeffs::Integer(out)
            }
            (Coeffs::Residue(ctx, a), Coeffs::Residue(_, b)) => {
                Coeffs::Residue(*ctx, mul_residues(*ctx, &a[..n], &b[..n]))
            }
            _ => unreachable!("ring checked"),
        };
        Ok(QExpansion { coeffs })
    }

    /// `self^e` modulo `q^prec`.
    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(self.ring(), self.prec())?;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base)?;
            }
        }
        Ok(acc)
    }

    fn zip_with(
        &self,
        other: &Self,
        int_op: impl Fn(&BigInt, &BigInt) -> BigInt,
        res_op: impl Fn(&FieldContext, u64, u64) -> u64,
    ) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.prec().min(other.prec());
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Integer(a), Coeffs::Integer(b)) => {
                Coeffs::Integer(a.iter().zip(b).take(n).map(|(x, y)| int_op(x, y)).collect())
            }
            (Coeffs::Residue(ctx, a), Coeffs::Residue(_, b)) => Coeffs::Residue(
                *ctx,
                a.iter().zip(b).take(n).map(|(&x, &y)| res_op(ctx, x, y)).collect(),
            ),
            _ => unreachable!("ring checked"),
        };
        Ok(QExpansion { coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, |c, a, b| c.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, |c, a, b| c.sub(a, b))
    }

    /// `self + scalar * other`; the scalar is reduced mod p for residue series.
    pub fn add_scaled(&self, other: &Self, scalar: &BigInt) -> Result<Self> {
        match self.ring() {
            Ring::Integers => self.zip_with(other, |a, b| a + scalar * b, |_, _, _| unreachable!()),
            Ring::Field(ctx) => {
                let s = ctx.from_bigint(scalar);
                self.zip_with(other, |_, _| unreachable!(), |c, a, b| c.add(a, c.mul(s, b)))
            }
        }
    }

    pub fn scale(&self, scalar: &BigInt) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Integer(v) => Coeffs::Integer(v.iter().map(|c| c * scalar).collect()),
            Coeffs::Residue(ctx, v) => {
                let s = ctx.from_bigint(scalar);
                Coeffs::Residue(*ctx, v.iter().map(|&c| ctx.mul(c, s)).collect())
            }
        };
        QExpansion { coeffs }
    }

    /// Multiplies `a_n` by `weight(n)` for every n.
    pub fn scale_indices(&self, weight: impl Fn(usize) -> BigInt) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Integer(v) => {
                Coeffs::Integer(v.iter().enumerate().map(|(n, c)| c * weight(n)).collect())
            }
            Coeffs::Residue(ctx, v) => Coeffs::Residue(
                *ctx,
                v.iter()
                    .enumerate()
                    .map(|(n, &c)| ctx.mul(c, ctx.from_bigint(&weight(n))))
                    .collect(),
            ),
        };
        QExpansion { coeffs }
    }

    /// Builds a series of precision `out_prec` whose n-th coefficient is `a_{source(n)}`,
    /// or zero where `source` returns `None`. Every returned index must be below `prec`.
    pub fn gather(&self, out_prec: usize, source: impl Fn(usize) -> Option<usize>) -> Result<Self> {
        if out_prec == 0 {
            return Err(Error::precision(1, 0));
        }
        let prec = self.prec();
        let mut idx = Vec::with_capacity(out_prec);
        for n in 0..out_prec {
            let s = source(n);
            if let Some(s) = s {
                if s >= prec {
                    return Err(Error::precision(s + 1, prec));
                }
            }
            idx.push(s);
        }
        let coeffs = match &self.coeffs {
            Coeffs::Integer(v) => Coeffs::Integer(
                idx.iter().map(|s| s.map_or_else(BigInt::zero, |s| v[s].clone())).collect(),
            ),
            Coeffs::Residue(ctx, v) => {
                Coeffs::Residue(*ctx, idx.iter().map(|s| s.map_or(0, |s| v[s])).collect())
            }
        };
        Ok(QExpansion { coeffs })
    }

    /// Whether coefficients `0..n` agree. Errors instead of truncating silently.
    pub fn equal_up_to(&self, other: &Self, n: usize) -> Result<bool> {
        self.check_ring(other)?;
        let avail = self.prec().min(other.prec());
        if n > avail {
            return Err(Error::precision(n, avail));
        }
        Ok(match (&self.coeffs, &other.coeffs) {
            (Coeffs::Integer(a), Coeffs::Integer(b)) => a[..n] == b[..n],
            (Coeffs::Residue(_, a), Coeffs::Residue(_, b)) => a[..n] == b[..n],
            _ => unreachable!("ring checked"),
        })
    }

    /// Coefficientwise reduction of an integer series into F_p. Residue series are
    /// returned unchanged when already over `ctx`.
    pub fn reduce_mod_p(&self, ctx: FieldContext) -> Result<Self> {
        match &self.coeffs {
            Coeffs::Integer(v) => {
                Self::residue(ctx, v.iter().map(|c| ctx.from_bigint(c)).collect())
            }
            Coeffs::Residue(c, _) if *c == ctx => Ok(self.clone()),
            Coeffs::Residue(c, _) => {
                Err(Error::RingMismatch(Ring::Field(*c).to_string(), Ring::Field(ctx).to_string()))
            }
        }
    }

    /// Text form `p=<p> k=<k> prec=<N>; c0 c1 ...`; exact integer series use `p=0`.
    pub fn to_text(&self, weight: i64) -> String {
        let (p, body): (u64, Vec<String>) = match &self.coeffs {
            Coeffs::Integer(v) => (0, v.iter().map(|c| c.to_string()).collect()),
            Coeffs::Residue(ctx, v) => (ctx.p(), v.iter().map(|c| c.to_string()).collect()),
        };
        format!("p={} k={} prec={}; {}", p, weight, self.prec(), body.join(" "))
    }

    /// Parses the text form written by [`QExpansion::to_text`], returning the series and weight.
    pub fn parse_text(s: &str) -> Result<(Self, i64)> {
        let (head, body) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| Error::Parse("missing ';' separator".into()))?;
        let mut p = None;
        let mut k = None;
        let mut prec = None;
        for field in head.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field '{field}'")))?;
            let bad = |_| Error::Parse(format!("bad value in '{field}'"));
            match key {
                "p" => p = Some(val.parse::<u64>().map_err(bad)?),
                "k" => k = Some(val.parse::<i64>().map_err(bad)?),
                "prec" => prec = Some(val.parse::<usize>().map_err(bad)?),
                _ => return Err(Error::Parse(format!("unknown header key '{key}'"))),
            }
        }
        let (p, k, prec) = match (p, k, prec) {
            (Some(p), Some(k), Some(n)) => (p, k, n),
            _ => return Err(Error::Parse("header needs p, k and prec".into())),
        };
        let coeffs: Vec<BigInt> = body
            .split_whitespace()
            .map(|t| t.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad coefficient '{t}'"))))
            .collect::<Result<_>>()?;
        if coeffs.len() != prec {
            return Err(Error::Parse(format!(
                "prec={} but {} coefficients given",
                prec,
                coeffs.len()
            )));
        }
        let series = if p == 0 {
            Self::integer(coeffs)?
        } else {
            let ctx = FieldContext::new(p)?;
            if coeffs.iter().any(|c| c.is_negative() || c >= &BigInt::from(p)) {
                return Err(Error::Parse(format!("residues must lie in [0,{p})")));
            }
            Self::residue(ctx, coeffs.iter().map(|c| ctx.from_bigint(c)).collect())?
        };
        Ok((series, k))
    }
}

fn mul_residues(ctx: FieldContext, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len();
    let p = ctx.p();
    // Each product is below p^2 < 2^62; flush before the accumulator can overflow.
    let limit = u64::MAX - p * p;
    let mut out = vec![0u64; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc: u64 = 0;
        for i in 0..=k {
            let (x, y) = (a[i], b[k - i]);
            if x == 0 || y == 0 {
                continue;
            }
            acc += x * y;
            if acc >= limit {
                acc %= p;
            }
        }
        *slot = acc % p;
    }
    out
}
