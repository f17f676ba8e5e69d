//! Truncated local rings `F_p[[x_1..x_r]] / (I + m^{D+1})` and their Hilbert functions.
//!
//! Everything is computed from one echelon form: the rows are all products
//! `monomial * relation` truncated at degree `D`, and the columns are the
//! monomials of degree `<= D` in ascending degree. The number of pivots in
//! the columns of degree `<= n` is the dimension of `I` modulo `m^{n+1}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldseries::FieldContext;
use crate::linalg::Matrix;

/// A polynomial over F_p as a map from exponent vectors to nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn monomial(ctx: FieldContext, exps: Vec<u32>, coeff: i64) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(ctx, exps, ctx.from_i64(coeff));
        p
    }

    fn add_term(&mut self, ctx: FieldContext, exps: Vec<u32>, c: u64) {
        let entry = self.terms.entry(exps).or_insert(0);
        *entry = ctx.add(*entry, c);
        self.terms.retain(|_, v| *v != 0);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, u64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest total degree of a term (the order of `f` in the local ring).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    /// Highest total degree of a term.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn constant_term(&self) -> u64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0)
    }

    /// Parses expressions such as `x*y - c`, `3*x1^2 + y*a` over the given variables.
    pub fn parse(ctx: FieldContext, vars: &[String], s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("polynomial '{s}': {m}"));
        let mut poly = Poly::zero(vars.len());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad("empty"));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !compact[..i].ends_with('^') {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1i64, rest),
                None => (1, term.strip_prefix('+').unwrap_or(term)),
            };
            if body.is_empty() {
                return Err(bad("dangling sign"));
            }
            let mut coeff = ctx.from_i64(sign);
            let mut exps = vec![0u32; vars.len()];
            for factor in body.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (b, e.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                    None => (factor, 1),
                };
                if let Ok(n) = base.parse::<i64>() {
                    coeff = ctx.mul(coeff, ctx.pow(ctx.from_i64(n), exp as u64));
                } else if let Some(idx) = vars.iter().position(|v| v == base) {
                    exps[idx] += exp;
                } else {
                    return Err(bad(&format!("unknown variable '{base}'")));
                }
            }
            poly.add_term(ctx, exps, coeff);
        }
        Ok(poly)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{c}*{e:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// JSON presentation `{"p":5,"vars":["x","y"],"relations":["x*y"]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPresentation {
    pub p: u64,
    pub vars: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TruncatedLocalRing {
    ctx: FieldContext,
    vars: Vec<String>,
    relations: Vec<Poly>,
    trunc: u32,
    monomials: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// `count_upto[n]` = number of monomials of degree `<= n`.
    count_upto: Vec<usize>,
    /// Echelon rows of the relation span, with their pivot columns.
    echelon: Matrix,
    pivots: Vec<usize>,
}

fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if d == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials_of_degree(nvars - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl TruncatedLocalRing {
    pub fn new(ctx: FieldContext, vars: Vec<String>, relations: Vec<Poly>, trunc: u32) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Invalid(format!("variable '{v}' listed twice")));
            }
        }
        for r in &relations {
            if r.nvars != vars.len() {
                return Err(Error::Invalid("relation has the wrong number of variables".into()));
            }
            if r.constant_term() != 0 {
                return Err(Error::Invalid(format!("relation {r} has a constant term")));
            }
        }
        let mut monomials = Vec::new();
        let mut count_upto = Vec::new();
        for d in 0..=trunc {
            monomials.extend(monomials_of_degree(vars.len(), d));
            count_upto.push(monomials.len());
        }
        let index: HashMap<Vec<u32>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut rows = Vec::new();
        for r in relations.iter().filter(|r| !r.is_zero()) {
            let ord = r.order().unwrap();
            if ord > trunc {
                continue;
            }
            for m in &monomials[..count_upto[(trunc - ord) as usize]] {
                let mut row = vec![0u64; monomials.len()];
                for (e, c) in r.terms() {
                    let prod: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                    if let Some(&col) = index.get(&prod) {
                        row[col] = ctx.add(row[col], c);
                    }
                }
                rows.push(row);
            }
        }
        let (echelon, pivots) = if rows.is_empty() {
            (Matrix::zeros(ctx, 0, monomials.len()), Vec::new())
        } else {
            Matrix::from_rows(ctx, monomials.len(), &rows).rref()
        };
        Ok(TruncatedLocalRing { ctx, vars, relations, trunc, monomials, index, count_upto, echelon, pivots })
    }

    pub fn from_presentation(pres: &RingPresentation, trunc: u32) -> Result<Self> {
        let ctx = FieldContext::new(pres.p)?;
        let relations = pres
            .relations
            .iter()
            .map(|s| Poly::parse(ctx, &pres.vars, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ctx, pres.vars.clone(), relations, trunc)
    }

    /// Same presentation with one more relation.
    pub fn quotient(&self, f: &Poly) -> Result<Self> {
        let mut rels = self.relations.clone();
        rels.push(f.clone());
        Self::new(self.ctx, self.vars.clone(), rels, self.trunc)
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    fn pivots_upto(&self, n: u32) -> usize {
        let cols = self.count_upto[n as usize];
        self.pivots.iter().filter(|&&c| c < cols).count()
    }

    /// `dim R / m^{n+1}` for `n <= D`.
    pub fn length(&self, n: u32) -> usize {
        self.count_upto[n as usize] - self.pivots_upto(n)
    }

    pub fn hilbert_function(&self) -> HilbertFunction {
        let coeffs = (0..=self.trunc)
            .map(|n| self.length(n) - if n == 0 { 0 } else { self.length(n - 1) })
            .collect();
        HilbertFunction { coeffs }
    }

    /// Reduces a vector supported on degrees `<= n` modulo the relation span there.
    fn reduce(&self, mut v: Vec<u64>, n: u32) -> Vec<u64> {
        let ctx = self.ctx;
        let cols = self.count_upto[n as usize];
        for (r, &pc) in self.pivots.iter().enumerate() {
            if pc >= cols || v[pc] == 0 {
                continue;
            }
            let factor = v[pc];
            let row = self.echelon.row(r);
            for c in 0..cols {
                v[c] = ctx.sub(v[c], ctx.mul(factor, row[c]));
            }
        }
        v
    }

    /// Whether multiplication by `f` is injective from `R / m^{D'+1}` to
    /// `R / m^{D'+ord(f)+1}`. Requires `D' + deg f <= D`.
    pub fn is_regular_up_to(&self, f: &Poly, d_prime: u32) -> Result<bool> {
        let deg = f.degree().unwrap_or(0);
        if d_prime + deg > self.trunc {
            return Err(Error::Degree(format!(
                "D' + deg f = {} exceeds the truncation degree {}",
                d_prime + deg,
                self.trunc
            )));
        }
        let Some(ord) = f.order() else {
            return Ok(false);
        };
        let target = d_prime + ord;
        let cols = self.count_upto[target as usize];
        let mut images = Vec::new();
        for m in &self.monomials[..self.count_upto[d_prime as usize]] {
            let mut v = vec![0u64; self.monomials.len()];
            for (e, c) in f.terms() {
                let prod: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                if let Some(&col) = self.index.get(&prod) {
                    if col < cols {
                        v[col] = self.ctx.add(v[col], c);
                    }
                }
            }
            let mut r = self.reduce(v, target);
            r.truncate(cols);
            images.push(r);
        }
        let rank = Matrix::from_rows(self.ctx, cols, &images).rank();
        Ok(rank == self.length(d_prime))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HilbertFunction {
    pub coeffs: Vec<usize>,
}

impl HilbertFunction {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,H\n");
        for (n, h) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{n},{h}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientConvergence {
    pub i: usize,
    pub target: usize,
    pub values: Vec<usize>,
    /// Index from which the sequence equals the target; `None` means not stabilized.
    pub stabilizes_at: Option<usize>,
}

/// For each `i <= i_max`, the index from which `H_j(i)` agrees with the target.
pub fn hilbert_limit_compare(
    sequence: &[TruncatedLocalRing],
    target: &TruncatedLocalRing,
    i_max: u32,
) -> Result<Vec<CoefficientConvergence>> {
    for r in sequence.iter().chain(std::iter::once(target)) {
        if r.vars.len() != target.vars.len() {
            return Err(Error::Invalid("rings have different numbers of variables".into()));
        }
        if r.trunc < i_max {
            return Err(Error::Degree(format!("truncation {} is below i_max = {i_max}", r.trunc)));
        }
    }
    let target_h = target.hilbert_function();
    let hs: Vec<HilbertFunction> = sequence.iter().map(|r| r.hilbert_function()).collect();
    Ok((0..=i_max as usize)
        .map(|i| {
            let values: Vec<usize> = hs.iter().map(|h| h.coeffs[i]).collect();
            let t = target_h.coeffs[i];
            let tail = values.iter().rev().take_while(|&&v| v == t).count();
            let stabilizes_at = (tail > 0).then(|| values.len() - tail);
            CoefficientConvergence { i, target: t, values, stabilizes_at }
        })
        .collect())
}
