//! Level-one modular forms over Z and F_p.
//!
//! `M_k` is spanned by the monomials `E4^a E6^b` with `4a + 6b = k`; over F_p
//! (p >= 5) their reductions stay a basis because the index of the monomial
//! lattice is a product of powers of 2 and 3. Cusp forms are `Delta * M_{k-12}`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldseries::{FieldContext, QExpansion, Ring};
use crate::linalg::SpanSolver;

/// Number of leading coefficients that separate forms of weight `k` at level one.
pub fn sturm(weight: u32) -> usize {
    weight as usize / 12 + 1
}

/// Exponent pairs `(a, b)` with `4a + 6b = k`, ordered by `a` descending.
pub fn monomial_exponents(weight: u32) -> Vec<(u32, u32)> {
    if weight % 2 == 1 {
        return Vec::new();
    }
    let mut out: Vec<(u32, u32)> = (0..=weight / 6)
        .filter(|b| (weight - 6 * b) % 4 == 0)
        .map(|b| ((weight - 6 * b) / 4, b))
        .collect();
    out.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    out
}

pub fn dim_full(weight: u32) -> usize {
    if weight % 2 == 1 {
        0
    } else if weight % 12 == 2 {
        weight as usize / 12
    } else {
        weight as usize / 12 + 1
    }
}

pub fn dim_cusp(weight: u32) -> usize {
    if weight >= 4 && weight % 2 == 0 {
        dim_full(weight) - 1
    } else {
        0
    }
}

fn divisor_power_sum(n: u64, e: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(e);
            let q = n / d;
            if q != d {
                s += BigInt::from(q).pow(e);
            }
        }
        d += 1;
    }
    s
}

/// `sigma_e(n)`, the sum of e-th powers of the divisors of n.
pub fn sigma(n: u64, e: u32) -> BigInt {
    divisor_power_sum(n, e)
}

/// Normalized Eisenstein series `E_4 = 1 + 240 sum sigma_3(n) q^n` or
/// `E_6 = 1 - 504 sum sigma_5(n) q^n` over Z.
pub fn eisenstein(weight: u32, prec: usize) -> Result<QExpansion> {
    let (scale, e) = match weight {
        4 => (BigInt::from(240), 3),
        6 => (BigInt::from(-504), 5),
        _ => return Err(Error::UnsupportedWeight(weight as i64)),
    };
    if prec == 0 {
        return Err(Error::precision(1, 0));
    }
    let coeffs = (0..prec)
        .map(|n| if n == 0 { BigInt::one() } else { &scale * sigma(n as u64, e) })
        .collect();
    QExpansion::integer(coeffs)
}

/// `q * prod (1 - q^n)^24` over Z.
pub fn delta(prec: usize) -> Result<QExpansion> {
    if prec == 0 {
        return Err(Error::precision(1, 0));
    }
    let euler = euler_product(Ring::Integers, prec)?;
    let p24 = euler.pow(24)?;
    p24.gather(prec, |n| n.checked_sub(1))
}

/// `prod_{n>=1} (1 - q^n)` to the given precision.
fn euler_product(ring: Ring, prec: usize) -> Result<QExpansion> {
    // Euler's pentagonal theorem: sum (-1)^m q^{m(3m-1)/2} over all integers m.
    let mut coeffs = vec![0i64; prec];
    for m in 0i64.. {
        let g1 = (m * (3 * m - 1) / 2) as usize;
        if g1 >= prec {
            break;
        }
        let sign = if m % 2 == 0 { 1 } else { -1 };
        coeffs[g1] += sign;
        if m > 0 {
            let g2 = (m * (3 * m + 1) / 2) as usize;
            if g2 < prec {
                coeffs[g2] += sign;
            }
        }
    }
    let f = QExpansion::from_i64s(&coeffs)?;
    match ring {
        Ring::Integers => Ok(f),
        Ring::Field(ctx) => f.reduce_mod_p(ctx),
    }
}

/// `(E4^3 - E6^2) / 1728` over Z, an independent route to Delta.
pub fn delta_from_eisenstein(prec: usize) -> Result<QExpansion> {
    let e4 = eisenstein(4, prec)?;
    let e6 = eisenstein(6, prec)?;
    let num = e4.pow(3)?.sub(&e6.pow(2)?)?;
    let d = BigInt::from(1728);
    let coeffs: Vec<BigInt> = num.integers().unwrap().iter().map(|c| c / &d).collect();
    let out = QExpansion::integer(coeffs)?;
    debug_assert_eq!(out.scale(&d), num);
    Ok(out)
}

/// `tau(n)` for `1 <= n < prec` via the product expansion.
pub fn ramanujan_tau(n: usize) -> BigInt {
    delta(n + 1).unwrap().coeff(n).unwrap()
}

/// Kind tag of a form space.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Full,
    Cusp,
    Ordinary,
    NonOrdinary,
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SpaceKind::Full),
            "cusp" => Ok(SpaceKind::Cusp),
            "ordinary" => Ok(SpaceKind::Ordinary),
            "non-ordinary" | "nonordinary" => Ok(SpaceKind::NonOrdinary),
            _ => Err(Error::Parse(format!("unknown space kind '{s}'"))),
        }
    }
}

/// A q-expansion tagged with its weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub weight: u32,
    pub series: QExpansion,
}

impl Form {
    pub fn new(weight: u32, series: QExpansion) -> Self {
        Form { weight, series }
    }

    pub fn ctx(&self) -> Result<FieldContext> {
        self.series.ctx().ok_or_else(|| Error::Invalid("expected a form over F_p".into()))
    }

    pub fn prec(&self) -> usize {
        self.series.prec()
    }
}

/// The constant form 1 of weight 0 over F_p.
pub fn constant_one(ctx: FieldContext, prec: usize) -> Result<Form> {
    Ok(Form::new(0, QExpansion::one(Ring::Field(ctx), prec)?))
}

/// `E4`, `E6` and `Delta` reduced mod p at a fixed precision.
#[derive(Clone, Debug)]
pub struct Generators {
    ctx: FieldContext,
    prec: usize,
    e4: QExpansion,
    e6: QExpansion,
    delta: QExpansion,
}

impl Generators {
    pub fn new(ctx: FieldContext, prec: usize) -> Result<Self> {
        if prec == 0 {
            return Err(Error::precision(1, 0));
        }
        let e4 = residue_eisenstein(ctx, 4, prec)?;
        let e6 = residue_eisenstein(ctx, 6, prec)?;
        let euler = euler_product(Ring::Field(ctx), prec)?;
        let delta = euler.pow(24)?.gather(prec, |n| n.checked_sub(1))?;
        Ok(Generators { ctx, prec, e4, e6, delta })
    }

    pub fn e4(&self) -> &QExpansion {
        &self.e4
    }

    pub fn e6(&self) -> &QExpansion {
        &self.e6
    }

    pub fn delta(&self) -> &QExpansion {
        &self.delta
    }

    /// Monomials `E4^a E6^b`, `4a + 6b = k`, in basis order.
    pub fn monomials(&self, weight: u32) -> Result<Vec<QExpansion>> {
        let exps = monomial_exponents(weight);
        let amax = exps.iter().map(|e| e.0).max().unwrap_or(0);
        let bmax = exps.iter().map(|e| e.1).max().unwrap_or(0);
        let ring = Ring::Field(self.ctx);
        let mut p4 = vec![QExpansion::one(ring, self.prec)?];
        for _ in 0..amax {
            let next = p4.last().unwrap().multiply(&self.e4)?;
            p4.push(next);
        }
        let mut p6 = vec![QExpansion::one(ring, self.prec)?];
        for _ in 0..bmax {
            let next = p6.last().unwrap().multiply(&self.e6)?;
            p6.push(next);
        }
        exps.iter()
            .map(|&(a, b)| p4[a as usize].multiply(&p6[b as usize]))
            .collect()
    }
}

fn residue_eisenstein(ctx: FieldContext, weight: u32, prec: usize) -> Result<QExpansion> {
    let (scale, e) = match weight {
        4 => (240i64, 3u32),
        6 => (-504, 5),
        _ => return Err(Error::UnsupportedWeight(weight as i64)),
    };
    let s = ctx.from_i64(scale);
    let coeffs = (0..prec)
        .map(|n| {
            if n == 0 {
                1
            } else {
                let mut acc = 0;
                let n = n as u64;
                let mut d = 1;
                while d * d <= n {
                    if n % d == 0 {
                        acc = ctx.add(acc, ctx.pow(d, e as u64));
                        if n / d != d {
                            acc = ctx.add(acc, ctx.pow(n / d, e as u64));
                        }
                    }
                    d += 1;
                }
                ctx.mul(s, acc)
            }
        })
        .collect();
    QExpansion::residue(ctx, coeffs)
}

/// A space of weight-k forms over F_p given by linearly independent q-expansions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSpace {
    ctx: FieldContext,
    weight: u32,
    prec: usize,
    kind: SpaceKind,
    basis: Vec<QExpansion>,
}

impl FormSpace {
    /// Wraps an explicit basis; checks precision and linear independence.
    pub fn from_basis(
        ctx: FieldContext,
        weight: u32,
        kind: SpaceKind,
        prec: usize,
        basis: Vec<QExpansion>,
    ) -> Result<Self> {
        if prec < sturm(weight) {
            return Err(Error::precision(sturm(weight), prec));
        }
        for f in &basis {
            if f.ctx() != Some(ctx) {
                return Err(Error::RingMismatch(f.ring().to_string(), ctx.to_string()));
            }
            if f.prec() != prec {
                return Err(Error::Invalid(format!(
                    "basis vector has precision {} but the space has {}",
                    f.prec(),
                    prec
                )));
            }
        }
        let rows: Vec<Vec<u64>> = basis.iter().map(|f| f.residues().unwrap().to_vec()).collect();
        if !SpanSolver::new(ctx, prec, &rows).is_independent() {
            return Err(Error::Invalid("basis vectors are linearly dependent".into()));
        }
        Ok(FormSpace { ctx, weight, prec, kind, basis })
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QExpansion] {
        &self.basis
    }

    pub fn forms(&self) -> Vec<Form> {
        self.basis.iter().map(|f| Form::new(self.weight, f.clone())).collect()
    }

    /// Solver for coordinates on the first `len` coefficients.
    pub fn solver(&self, len: usize) -> Result<SpanSolver> {
        if len > self.prec {
            return Err(Error::precision(len, self.prec));
        }
        if len < sturm(self.weight) {
            return Err(Error::precision(sturm(self.weight), len));
        }
        let rows: Vec<Vec<u64>> =
            self.basis.iter().map(|f| f.residues().unwrap()[..len].to_vec()).collect();
        Ok(SpanSolver::new(self.ctx, len, &rows))
    }

    /// Linear combination `sum c_i f_i` at the space's precision.
    pub fn combination(&self, coords: &[u64]) -> QExpansion {
        assert_eq!(coords.len(), self.dim());
        let ring = Ring::Field(self.ctx);
        let mut acc = QExpansion::zero(ring, self.prec).unwrap();
        for (c, f) in coords.iter().zip(&self.basis) {
            if *c != 0 {
                acc = acc.add_scaled(f, &BigInt::from(*c)).unwrap();
            }
        }
        acc
    }

    /// Same space with every basis vector truncated.
    pub fn truncated(&self, prec: usize) -> Result<Self> {
        if prec < sturm(self.weight) {
            return Err(Error::precision(sturm(self.weight), prec));
        }
        let basis = self.basis.iter().map(|f| f.truncate(prec)).collect::<Result<_>>()?;
        Ok(FormSpace { basis, prec, ..self.clone() })
    }

    /// Subspace spanned by the given coordinate vectors (assumed independent).
    pub fn subspace(&self, kind: SpaceKind, coords: &[Vec<u64>]) -> Self {
        let basis = coords.iter().map(|c| self.combination(c)).collect();
        FormSpace { ctx: self.ctx, weight: self.weight, prec: self.prec, kind, basis }
    }
}

/// Basis of `M_k(F_p)` or `S_k(F_p)` to precision `prec`.
pub fn basis(ctx: FieldContext, weight: u32, kind: SpaceKind, prec: usize) -> Result<FormSpace> {
    if prec < sturm(weight) {
        return Err(Error::precision(sturm(weight), prec));
    }
    let gens = Generators::new(ctx, prec)?;
    basis_from(&gens, weight, kind)
}

/// Like [`basis`] but reusing precomputed generators.
pub fn basis_from(gens: &Generators, weight: u32, kind: SpaceKind) -> Result<FormSpace> {
    let (ctx, prec) = (gens.ctx, gens.prec);
    if prec < sturm(weight) {
        return Err(Error::precision(sturm(weight), prec));
    }
    let vectors = match kind {
        SpaceKind::Full => gens.monomials(weight)?,
        SpaceKind::Cusp => {
            if weight < 12 || weight % 2 == 1 {
                Vec::new()
            } else {
                gens.monomials(weight - 12)?
                    .iter()
                    .map(|m| m.multiply(&gens.delta))
                    .collect::<Result<_>>()?
            }
        }
        other => {
            return Err(Error::Kind(format!("basis() builds full or cusp spaces, not {other:?}")))
        }
    };
    Ok(FormSpace { ctx, weight, prec, kind, basis: vectors })
}

/// Coordinates of `f` in `space`, or `None` when the truncated vector lies outside the span.
pub fn in_span(f: &QExpansion, space: &FormSpace) -> Result<Option<Vec<u64>>> {
    if f.ctx() != Some(space.ctx()) {
        return Err(Error::RingMismatch(f.ring().to_string(), space.ctx().to_string()));
    }
    let len = f.prec().min(space.prec());
    let solver = space.solver(len)?;
    Ok(solver.solve(&f.residues().unwrap()[..len]))
}

/// Multiplication by the Hasse invariant: same q-expansion in weight `k + p - 1`,
/// certified against the weight `k + p - 1` basis at the form's full precision.
pub fn hasse_multiply(f: &Form) -> Result<Form> {
    let ctx = f.ctx()?;
    let target = f.weight + (ctx.p() as u32 - 1);
    let space = basis(ctx, target, SpaceKind::Full, f.prec())?;
    if in_span(&f.series, &space)?.is_none() {
        return Err(Error::Membership(format!(
            "q-expansion is not in M_{target}(F_{}) after Hasse multiplication",
            ctx.p()
        )));
    }
    Ok(Form::new(target, f.series.clone()))
}

/// `A^m f` without certification (the q-expansion is unchanged).
pub fn hasse_shift(f: &Form, m: u32) -> Result<Form> {
    let ctx = f.ctx()?;
    Ok(Form::new(f.weight + m * (ctx.p() as u32 - 1), f.series.clone()))
}

/// The weight filtration `w(f)` of a mod-p form.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Filtration {
    Zero,
    Weight(u32),
}

impl Filtration {
    pub fn value(&self) -> Option<u32> {
        match self {
            Filtration::Zero => None,
            Filtration::Weight(w) => Some(*w),
        }
    }
}

/// Least `k0 = k mod (p-1)` such that `f` arises in weight `k0`.
pub fn filtration(f: &Form) -> Result<Filtration> {
    let ctx = f.ctx()?;
    let need = sturm(f.weight);
    if f.prec() < need {
        return Err(Error::precision(need, f.prec()));
    }
    let series = f.series.truncate(need)?;
    if series.is_zero() {
        return Ok(Filtration::Zero);
    }
    let step = ctx.p() as u32 - 1;
    let gens = Generators::new(ctx, need)?;
    let mut k0 = f.weight % step;
    while k0 <= f.weight {
        let space = basis_from(&gens, k0, SpaceKind::Full)?;
        if in_span(&series, &space)?.is_some() {
            return Ok(Filtration::Weight(k0));
        }
        k0 += step;
    }
    Err(Error::Membership(format!(
        "form is not in M_{}(F_{}); filtration undefined",
        f.weight,
        ctx.p()
    )))
}
