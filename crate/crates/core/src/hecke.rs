//! Hecke operators on q-expansions.
//!
//! Precision contract: `T_l` and `U_l` divide the precision by `l` (rounding
//! down), `T_n` by `n`, `V_p` multiplies it by `p`, and `theta` keeps it.
//! Outputs of `V_p` and `theta` are certified by solving against the basis of
//! the target weight; a failed certification is a [`Error::Membership`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldseries::{factorize, is_prime, FieldContext, QExpansion, Ring};
use crate::level1::{self, in_span, sturm, Form, FormSpace, SpaceKind};
use crate::linalg::{Matrix, Subspace};

/// Name of a Hecke-type operator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeckeOperatorLabel {
    T(u64),
    U(u64),
    Vp,
    Theta,
    Diamond(u64),
}

impl fmt::Display for HeckeOperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeOperatorLabel::T(n) => write!(f, "T{n}"),
            HeckeOperatorLabel::U(l) => write!(f, "U{l}"),
            HeckeOperatorLabel::Vp => write!(f, "Vp"),
            HeckeOperatorLabel::Theta => write!(f, "theta"),
            HeckeOperatorLabel::Diamond(d) => write!(f, "D{d}"),
        }
    }
}

impl FromStr for HeckeOperatorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown operator '{s}'"));
        let num = |t: &str| t.parse::<u64>().map_err(|_| bad());
        let label = match s {
            "Vp" | "vp" | "V" => HeckeOperatorLabel::Vp,
            "theta" | "Theta" => HeckeOperatorLabel::Theta,
            _ if s.starts_with('T') => HeckeOperatorLabel::T(num(&s[1..])?),
            _ if s.starts_with('U') => HeckeOperatorLabel::U(num(&s[1..])?),
            _ if s.starts_with('D') => HeckeOperatorLabel::Diamond(num(&s[1..])?),
            _ => return Err(bad()),
        };
        label.validate()?;
        Ok(label)
    }
}

impl HeckeOperatorLabel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HeckeOperatorLabel::T(0) => Err(Error::Invalid("T(n) needs n >= 1".into())),
            HeckeOperatorLabel::U(l) if !is_prime(l) => {
                Err(Error::Invalid(format!("U({l}) needs a prime index")))
            }
            HeckeOperatorLabel::Diamond(0) => Err(Error::Invalid("<d> needs d >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Whether the operator keeps the weight of a form.
    pub fn preserves_weight(&self) -> bool {
        !matches!(self, HeckeOperatorLabel::Vp | HeckeOperatorLabel::Theta)
    }

    /// Whether the operator involves the prime `p`.
    pub fn involves(&self, p: u64) -> bool {
        match *self {
            HeckeOperatorLabel::T(n) => n % p == 0,
            HeckeOperatorLabel::U(l) => l == p,
            HeckeOperatorLabel::Vp | HeckeOperatorLabel::Theta => true,
            HeckeOperatorLabel::Diamond(_) => false,
        }
    }
}

/// Input precision needed so that applying `ops` left to right yields `output`
/// coefficients.
pub fn input_precision(ops: &[HeckeOperatorLabel], output: usize, p: u64) -> usize {
    ops.iter().rev().fold(output, |m, op| match *op {
        HeckeOperatorLabel::T(n) => m * n as usize,
        HeckeOperatorLabel::U(l) => m * l as usize,
        HeckeOperatorLabel::Vp => m.div_ceil(p as usize),
        HeckeOperatorLabel::Theta | HeckeOperatorLabel::Diamond(_) => m,
    })
}

/// `l^(k-1)` in the coefficient ring; over F_p negative exponents use the inverse.
fn twist_scalar(ring: Ring, l: u64, weight: u32) -> Result<BigInt> {
    let e = weight as i64 - 1;
    match ring {
        Ring::Integers => {
            if e < 0 {
                return Err(Error::UnsupportedWeight(weight as i64));
            }
            Ok(BigInt::from(l).pow(e as u32))
        }
        Ring::Field(ctx) => ctx
            .pow_signed(l % ctx.p(), e)
            .map(BigInt::from)
            .ok_or(Error::UnsupportedWeight(weight as i64)),
    }
}

fn output_precision(prec: usize, l: u64) -> Result<usize> {
    let m = prec / l as usize;
    if m == 0 {
        return Err(Error::precision(l as usize, prec));
    }
    Ok(m)
}

/// `U_l`: `sum a_{nl} q^n`, precision `floor(prec / l)`.
pub fn apply_ul(f: &Form, l: u64) -> Result<Form> {
    HeckeOperatorLabel::U(l).validate()?;
    let m = output_precision(f.prec(), l)?;
    let series = f.series.gather(m, |n| Some(n * l as usize))?;
    Ok(Form::new(f.weight, series))
}

/// `T_l` for a prime `l` different from the characteristic:
/// `a_{nl} + l^{k-1} a_{n/l}` (the diamond operator is trivial at level one).
pub fn apply_tl(f: &Form, l: u64) -> Result<Form> {
    if !is_prime(l) {
        return Err(Error::Invalid(format!("T_l needs a prime, got {l}")));
    }
    let ring = f.series.ring();
    if let Ring::Field(ctx) = ring {
        if l == ctx.p() {
            return Err(Error::BadPrime(l));
        }
    }
    let m = output_precision(f.prec(), l)?;
    let l_us = l as usize;
    let up = f.series.gather(m, |n| Some(n * l_us))?;
    let down = f.series.gather(m, |n| (n % l_us == 0).then(|| n / l_us))?;
    let scalar = twist_scalar(ring, l, f.weight)?;
    Ok(Form::new(f.weight, up.add_scaled(&down, &scalar)?))
}

/// `T_n` assembled from `T_{l^{s+1}} = T_l T_{l^s} - l^{k-1} T_{l^{s-1}}` and
/// multiplicativity. Over F_p the factor at `p` is `U_p^s` (weight >= 2).
pub fn apply_tn(f: &Form, n: u64) -> Result<Form> {
    if n == 0 {
        return Err(Error::Invalid("T_n needs n >= 1".into()));
    }
    let needed = n as usize;
    if f.prec() < needed {
        return Err(Error::precision(needed, f.prec()));
    }
    let ring = f.series.ring();
    let mut acc = f.clone();
    for (l, e) in factorize(n) {
        acc = match ring {
            Ring::Field(ctx) if l == ctx.p() => {
                if f.weight < 2 {
                    return Err(Error::UnsupportedWeight(f.weight as i64));
                }
                let mut g = acc;
                for _ in 0..e {
                    g = apply_ul(&g, l)?;
                }
                g
            }
            _ => prime_power(&acc, l, e)?,
        };
    }
    Ok(acc)
}

fn prime_power(f: &Form, l: u64, e: u32) -> Result<Form> {
    let scalar = -twist_scalar(f.series.ring(), l, f.weight)?;
    let mut prev = f.clone();
    let mut cur = apply_tl(f, l)?;
    for _ in 1..e {
        let next = apply_tl(&cur, l)?;
        let series = next.series.add_scaled(&prev.series, &scalar)?;
        prev = cur;
        cur = Form::new(f.weight, series);
    }
    Ok(cur)
}

/// `V_p` without certification: `sum a_n q^{pn}` at precision `p * prec`, weight `p k`.
pub fn spread_vp(f: &Form) -> Result<Form> {
    let ctx = f.ctx()?;
    let p = ctx.p() as usize;
    let series = f.series.gather(p * f.prec(), |n| (n % p == 0).then(|| n / p))?;
    Ok(Form::new(f.weight * p as u32, series))
}

/// `V_p`, certified to lie in `M_{pk}(F_p)` at the output precision.
pub fn apply_vp(f: &Form) -> Result<Form> {
    let g = spread_vp(f)?;
    certify(&g, "V_p")?;
    Ok(g)
}

/// `theta`: `sum n a_n q^n` in weight `k + p + 1`, certified.
pub fn apply_theta(f: &Form) -> Result<Form> {
    let g = theta_uncertified(f)?;
    if g.prec() < sturm(g.weight) {
        return Err(Error::precision(sturm(g.weight), g.prec()));
    }
    certify(&g, "theta")?;
    Ok(g)
}

pub(crate) fn theta_uncertified(f: &Form) -> Result<Form> {
    let ctx = f.ctx()?;
    let series = f.series.scale_indices(|n| BigInt::from(n));
    Ok(Form::new(f.weight + ctx.p() as u32 + 1, series))
}

fn certify(g: &Form, what: &str) -> Result<()> {
    let ctx = g.ctx()?;
    let target = level1::basis(ctx, g.weight, SpaceKind::Full, g.prec())?;
    if in_span(&g.series, &target)?.is_none() {
        return Err(Error::Membership(format!(
            "{what} output is not in M_{}(F_{})",
            g.weight,
            ctx.p()
        )));
    }
    Ok(())
}

/// Applies any labelled operator.
pub fn apply(f: &Form, op: HeckeOperatorLabel) -> Result<Form> {
    op.validate()?;
    match op {
        HeckeOperatorLabel::T(n) => apply_tn(f, n),
        HeckeOperatorLabel::U(l) => apply_ul(f, l),
        HeckeOperatorLabel::Vp => apply_vp(f),
        HeckeOperatorLabel::Theta => apply_theta(f),
        HeckeOperatorLabel::Diamond(_) => Ok(f.clone()),
    }
}

/// Weight-preserving operator application without the `V_p`/`theta` certification step.
fn apply_raw(f: &Form, op: HeckeOperatorLabel) -> Result<Form> {
    match op {
        HeckeOperatorLabel::Vp => spread_vp(f),
        HeckeOperatorLabel::Theta => theta_uncertified(f),
        other => apply(f, other),
    }
}

/// Matrix of a weight-preserving operator in the basis of `space`.
pub fn operator_matrix(space: &FormSpace, op: HeckeOperatorLabel) -> Result<Matrix> {
    op.validate()?;
    if !op.preserves_weight() {
        return Err(Error::Kind(format!("{op} changes the weight; use map_matrix")));
    }
    let ctx = space.ctx();
    let d = space.dim();
    if let HeckeOperatorLabel::Diamond(_) = op {
        return Ok(Matrix::identity(ctx, d));
    }
    let needed = input_precision(&[op], sturm(space.weight()), ctx.p());
    if space.prec() < needed {
        return Err(Error::precision(needed, space.prec()));
    }
    let out_len = match op {
        HeckeOperatorLabel::T(n) => space.prec() / n as usize,
        HeckeOperatorLabel::U(l) => space.prec() / l as usize,
        _ => space.prec(),
    };
    let solver = space.solver(out_len)?;
    let mut cols = Vec::with_capacity(d);
    for f in space.forms() {
        let g = apply_raw(&f, op)?;
        let coords = solver.solve(&g.series.residues().unwrap()[..out_len]).ok_or_else(|| {
            Error::Membership(format!(
                "{op} does not preserve the {:?} space of weight {}",
                space.kind(),
                space.weight()
            ))
        })?;
        cols.push(coords);
    }
    Ok(Matrix::from_columns(ctx, d, &cols))
}

/// Matrix of `op` from `source` into `target` (used for `V_p`, `theta` and Hasse maps).
/// Column `j` holds the coordinates of `op(f_j)` in the target basis.
pub fn map_matrix(source: &FormSpace, target: &FormSpace, op: HeckeOperatorLabel) -> Result<Matrix> {
    let ctx = source.ctx();
    let mut cols = Vec::with_capacity(source.dim());
    for f in source.forms() {
        let g = apply_raw(&f, op)?;
        if g.weight != target.weight() {
            return Err(Error::Kind(format!(
                "{op} sends weight {} to {}, target has weight {}",
                source.weight(),
                g.weight,
                target.weight()
            )));
        }
        let coords = in_span(&g.series, target)?.ok_or_else(|| {
            Error::Membership(format!("{op} image is not in the weight {} target", target.weight()))
        })?;
        cols.push(coords);
    }
    Ok(Matrix::from_columns(ctx, target.dim(), &cols))
}

/// Ordinary / non-ordinary (Fitting) decomposition with respect to `U_p`.
#[derive(Clone, Debug)]
pub struct FittingDecomposition {
    pub ordinary: FormSpace,
    pub nonordinary: FormSpace,
    /// Coordinates (in the ambient basis) spanning each part.
    pub ordinary_coords: Subspace,
    pub nonordinary_coords: Subspace,
    pub up_matrix: Matrix,
}

impl FittingDecomposition {
    /// `U_p` restricted to the ordinary part is invertible.
    pub fn ordinary_is_invertible(&self) -> bool {
        let m = restrict(&self.up_matrix, &self.ordinary_coords);
        m.rank() == m.rows()
    }

    /// `U_p` restricted to the non-ordinary part is nilpotent.
    pub fn nonordinary_is_nilpotent(&self) -> bool {
        let m = restrict(&self.up_matrix, &self.nonordinary_coords);
        m.pow(m.rows() as u64).is_zero()
    }
}

/// Matrix of `m` restricted to an invariant subspace, in the subspace's echelon basis.
pub fn restrict(m: &Matrix, sub: &Subspace) -> Matrix {
    let ctx = m.ctx();
    let solver = crate::linalg::SpanSolver::new(ctx, sub.ambient_dim(), sub.basis());
    let cols: Vec<Vec<u64>> = sub
        .basis()
        .iter()
        .map(|v| solver.solve(&m.mul_vec(v)).expect("subspace is invariant"))
        .collect();
    Matrix::from_columns(ctx, sub.dim(), &cols)
}

pub fn ord_no_decompose(space: &FormSpace) -> Result<FittingDecomposition> {
    if space.weight() < 2 {
        return Err(Error::UnsupportedWeight(space.weight() as i64));
    }
    let ctx = space.ctx();
    let d = space.dim();
    let up = operator_matrix(space, HeckeOperatorLabel::U(ctx.p()))?;
    let power = up.pow(d as u64);
    let ord = power.column_space();
    let no = Subspace::from_vectors(ctx, d, &power.kernel());
    if ord.dim() + no.dim() != d || ord.intersect(&no).dim() != 0 {
        return Err(Error::Stability("Fitting decomposition is not a direct sum".into()));
    }
    let ordinary = space.subspace(SpaceKind::Ordinary, ord.basis());
    let nonordinary = space.subspace(SpaceKind::NonOrdinary, no.basis());
    Ok(FittingDecomposition {
        ordinary,
        nonordinary,
        ordinary_coords: ord,
        nonordinary_coords: no,
        up_matrix: up,
    })
}

/// Result of building a non-ordinary form from an ordinary eigenform.
#[derive(Clone, Debug)]
pub struct NonOrdinaryForm {
    pub form: Form,
    pub a_p: u64,
    /// `(l, lambda_l)` with `T_l g = lambda_l g` verified.
    pub eigenvalues: Vec<(u64, u64)>,
}

/// `g = A^k f - a_p V_p(f)` for an ordinary `U_p`-eigenform `f` of weight `k >= 2`.
/// Verifies `g` in `M_{pk}`, `U_p g = 0`, and `T_l g = a_l(f) g` for every test prime.
pub fn nonordinary_from_ordinary(f: &Form, a_p: u64, test_primes: &[u64]) -> Result<NonOrdinaryForm> {
    let ctx = f.ctx()?;
    let p = ctx.p();
    if f.weight < 2 {
        return Err(Error::UnsupportedWeight(f.weight as i64));
    }
    let a_p = a_p % p;
    if a_p == 0 {
        return Err(Error::NotEigenform("a_p must be a unit for an ordinary form".into()));
    }
    let target_weight = f.weight * p as u32;
    let need = p as usize * sturm(target_weight);
    if f.prec() < need {
        return Err(Error::precision(need, f.prec()));
    }
    let up_f = apply_ul(f, p)?;
    let m = up_f.prec();
    let expected = f.series.truncate(m)?.scale(&BigInt::from(a_p));
    if up_f.series != expected {
        return Err(Error::NotEigenform(format!("U_{p} f != {a_p} f")));
    }
    let a1 = f.series.coeff(1)?;
    let a1 = ctx.from_bigint(&a1);
    let a1_inv = ctx
        .inv(a1)
        .ok_or_else(|| Error::NotEigenform("a_1(f) = 0".into()))?;

    let vp = spread_vp(f)?.series.truncate(f.prec())?;
    let series = f.series.add_scaled(&vp, &-BigInt::from(a_p))?;
    let g = Form::new(target_weight, series);
    certify(&g, "A^k f - a_p V_p f")?;

    let up_g = apply_ul(&g, p)?;
    if !up_g.series.is_zero() {
        return Err(Error::Membership(format!("U_{p} g is nonzero")));
    }

    let mut eigenvalues = Vec::new();
    for &l in test_primes {
        if l == p {
            continue;
        }
        let al = ctx.from_bigint(&f.series.coeff(l as usize)?);
        let lambda = ctx.mul(al, a1_inv);
        let tf = apply_tl(f, l)?;
        let f_scaled = f.series.truncate(tf.prec())?.scale(&BigInt::from(lambda));
        if tf.series != f_scaled {
            return Err(Error::NotEigenform(format!("f is not a T_{l} eigenform")));
        }
        let tg = apply_tl(&g, l)?;
        if tg.prec() < sturm(target_weight) {
            return Err(Error::precision(l as usize * sturm(target_weight), g.prec()));
        }
        let g_scaled = g.series.truncate(tg.prec())?.scale(&BigInt::from(lambda));
        if tg.series != g_scaled {
            return Err(Error::Membership(format!("T_{l} g != {lambda} g")));
        }
        eigenvalues.push((l, lambda));
    }
    Ok(NonOrdinaryForm { form: g, a_p, eigenvalues })
}

/// `a_m(T_n f) = sum_{d | gcd(m, n)} d^{k-1} a_{mn/d^2}` evaluated directly.
/// Independent of the recursion in [`apply_tn`]; used for cross-checks.
pub fn tn_coefficient_formula(f: &Form, n: u64, m: u64) -> Result<BigInt> {
    let ring = f.series.ring();
    let g = m.gcd(&n);
    let mut acc = BigInt::from(0);
    for d in (1..=g).filter(|d| g % d == 0) {
        let idx = (m * n / (d * d)) as usize;
        let c = f.series.coeff(idx)?;
        let w = match ring {
            Ring::Field(ctx) if d % ctx.p() == 0 => {
                if f.weight >= 2 {
                    BigInt::from(0)
                } else {
                    return Err(Error::UnsupportedWeight(f.weight as i64));
                }
            }
            _ => twist_scalar(ring, d, f.weight)?,
        };
        acc += w * c;
    }
    if let Ring::Field(ctx) = ring {
        return Ok(BigInt::from(ctx.from_bigint(&acc)));
    }
    Ok(acc)
}

/// Eigenvalue of a normalized eigenform under `T_l`: `a_l / a_1`.
pub fn eigenvalue_from_coefficients(ctx: FieldContext, f: &QExpansion, l: u64) -> Result<u64> {
    let a1 = ctx.from_bigint(&f.coeff(1)?);
    let al = ctx.from_bigint(&f.coeff(l as usize)?);
    let inv = ctx.inv(a1).ok_or_else(|| Error::NotEigenform("a_1 = 0".into()))?;
    Ok(ctx.mul(al, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level1::{basis, delta, eisenstein};

    fn ctx(p: u64) -> FieldContext {
        FieldContext::new(p).unwrap()
    }

    fn delta_mod(p: u64, prec: usize) -> Form {
        Form::new(12, delta(prec).unwrap().reduce_mod_p(ctx(p)).unwrap())
    }

    #[test]
    fn ul_examples() {
        let u = apply_ul(&delta_mod(5, 20), 5).unwrap();
        assert_eq!(u.prec(), 4);
        assert_eq!(u.series.coeff(1).unwrap(), BigInt::from(0));
        let one = level1::constant_one(ctx(5), 12).unwrap();
        assert_eq!(apply_ul(&one, 3).unwrap().series, QExpansion::one(Ring::Field(ctx(5)), 4).unwrap());
        let u11 = apply_ul(&delta_mod(11, 24), 11).unwrap();
        assert_eq!(u11.series.coeff(1).unwrap(), BigInt::from(1));
        assert!(matches!(apply_ul(&delta_mod(5, 4), 5), Err(Error::Precision { .. })));
    }

    #[test]
    fn tl_examples() {
        let c7 = ctx(7);
        let e4 = Form::new(4, eisenstein(4, 6).unwrap().reduce_mod_p(c7).unwrap());
        let t2 = apply_tl(&e4, 2).unwrap();
        assert_eq!(t2.prec(), 3);
        assert_eq!(t2.series, e4.series.truncate(3).unwrap().scale(&BigInt::from(2)));

        let zero = Form::new(4, QExpansion::zero(Ring::Field(c7), 6).unwrap());
        assert!(apply_tl(&zero, 2).unwrap().series.is_zero());

        let t3 = apply_tl(&delta_mod(5, 9), 3).unwrap();
        assert_eq!(t3.series.coeff(1).unwrap(), BigInt::from(2));

        assert_eq!(apply_tl(&delta_mod(5, 10), 5), Err(Error::BadPrime(5)));
    }

    #[test]
    fn tn_examples() {
        let c11 = ctx(11);
        let e4 = Form::new(4, eisenstein(4, 12).unwrap().reduce_mod_p(c11).unwrap());
        let t4 = apply_tn(&e4, 4).unwrap();
        assert_eq!(t4.series, e4.series.truncate(3).unwrap().scale(&BigInt::from(7)));

        let d = delta_mod(7, 20);
        assert_eq!(apply_tn(&d, 1).unwrap(), d);
        assert_eq!(apply_tn(&d, 6).unwrap().series.coeff(1).unwrap(), BigInt::from(0));
    }

    #[test]
    fn tn_over_integers_matches_divisor_formula() {
        let d = Form::new(12, delta(60).unwrap());
        for n in 1..=12u64 {
            let t = apply_tn(&d, n).unwrap();
            for m in 0..t.prec() as u64 {
                assert_eq!(t.series.coeff(m as usize).unwrap(), tn_coefficient_formula(&d, n, m).unwrap());
            }
            // a_1(T_n f) = a_n(f)
            assert_eq!(t.series.coeff(1).unwrap(), d.series.coeff(n as usize).unwrap());
        }
    }

    #[test]
    fn vp_examples() {
        let c = ctx(5);
        let d = delta_mod(5, 14);
        let v = apply_vp(&d).unwrap();
        assert_eq!(v.weight, 60);
        assert_eq!(v.prec(), 70);
        for n in 0..70 {
            let expect = if n % 5 == 0 { d.series.coeff(n / 5).unwrap() } else { BigInt::from(0) };
            assert_eq!(v.series.coeff(n).unwrap(), expect);
        }
        assert_eq!(v.series.coeff(5).unwrap(), BigInt::from(1));
        let z = Form::new(12, QExpansion::zero(Ring::Field(c), 3).unwrap());
        assert!(apply_vp(&z).unwrap().series.is_zero());
        assert_eq!(apply_ul(&v, 5).unwrap().series, d.series);
    }

    #[test]
    fn theta_examples() {
        let c = ctx(5);
        let d = delta_mod(5, 4);
        let v = spread_vp(&d).unwrap();
        assert!(theta_uncertified(&v).unwrap().series.is_zero());
        let one = level1::constant_one(c, 3).unwrap();
        assert!(apply_theta(&one).unwrap().series.is_zero());
        let t = apply_theta(&delta_mod(7, 6)).unwrap();
        assert_eq!(t.weight, 20);
        assert_eq!(t.series.coeff(2).unwrap(), BigInt::from(1));
    }

    #[test]
    fn operator_matrix_examples() {
        let c5 = ctx(5);
        let s12 = basis(c5, 12, SpaceKind::Cusp, 10).unwrap();
        let u5 = operator_matrix(&s12, HeckeOperatorLabel::U(5)).unwrap();
        assert_eq!(u5, Matrix::zeros(c5, 1, 1));
        let m12 = basis(c5, 12, SpaceKind::Full, 10).unwrap();
        assert_eq!(operator_matrix(&m12, HeckeOperatorLabel::T(1)).unwrap(), Matrix::identity(c5, 2));
        let t2 = operator_matrix(&m12, HeckeOperatorLabel::T(2)).unwrap();
        let cp = t2.charpoly();
        // tau(2) = 1 mod 5 is a root
        let val = cp.iter().rev().fold(0, |acc, &c| c5.add(c5.mul(acc, 1), c));
        assert_eq!(val, 0);
        assert!(matches!(
            operator_matrix(&m12, HeckeOperatorLabel::Theta),
            Err(Error::Kind(_))
        ));
        assert!(matches!(
            operator_matrix(&basis(c5, 12, SpaceKind::Full, 3).unwrap(), HeckeOperatorLabel::T(2)),
            Err(Error::Precision { .. })
        ));
    }

    #[test]
    fn decomposition_examples() {
        let s5 = basis(ctx(5), 12, SpaceKind::Cusp, 10).unwrap();
        let d5 = ord_no_decompose(&s5).unwrap();
        assert_eq!((d5.ordinary.dim(), d5.nonordinary.dim()), (0, 1));
        let s11 = basis(ctx(11), 12, SpaceKind::Cusp, 22).unwrap();
        let d11 = ord_no_decompose(&s11).unwrap();
        assert_eq!((d11.ordinary.dim(), d11.nonordinary.dim()), (1, 0));
        assert!(d11.ordinary_is_invertible() && d11.nonordinary_is_nilpotent());
        let z = basis(ctx(5), 14, SpaceKind::Cusp, 10).unwrap();
        let dz = ord_no_decompose(&z).unwrap();
        assert_eq!((dz.ordinary.dim(), dz.nonordinary.dim()), (0, 0));
    }

    #[test]
    fn nonordinary_construction_rejects_weight_zero() {
        let one = level1::constant_one(ctx(11), 200).unwrap();
        assert_eq!(
            nonordinary_from_ordinary(&one, 1, &[2]).unwrap_err(),
            Error::UnsupportedWeight(0)
        );
    }

    #[test]
    fn input_precision_backwards() {
        use HeckeOperatorLabel::*;
        assert_eq!(input_precision(&[T(2), U(5)], 3, 5), 30);
        assert_eq!(input_precision(&[Vp], 10, 5), 2);
        assert_eq!(input_precision(&[Theta], 7, 5), 7);
    }

    #[test]
    fn label_parsing() {
        assert_eq!("T2".parse::<HeckeOperatorLabel>().unwrap(), HeckeOperatorLabel::T(2));
        assert_eq!("U5".parse::<HeckeOperatorLabel>().unwrap(), HeckeOperatorLabel::U(5));
        assert_eq!("theta".parse::<HeckeOperatorLabel>().unwrap(), HeckeOperatorLabel::Theta);
        assert!("U6".parse::<HeckeOperatorLabel>().is_err());
        assert!("T0".parse::<HeckeOperatorLabel>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_form(p: u64, weight: u32, prec: usize, coords: &[u64]) -> Form {
            let space = basis(ctx(p), weight, SpaceKind::Full, prec).unwrap();
            let c: Vec<u64> = (0..space.dim()).map(|i| coords[i % coords.len()] % p).collect();
            Form::new(weight, space.combination(&c))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn hecke_operators_commute(
                p in prop::sample::select(vec![5u64, 7, 11]),
                half in 2u32..20,
                m in 1u64..8,
                n in 1u64..8,
                coords in prop::collection::vec(0u64..100, 1..6),
            ) {
                prop_assume!(m % p != 0 && n % p != 0);
                let f = random_form(p, 2 * half, 64 * 3, &coords);
                let mn = apply_tn(&apply_tn(&f, n).unwrap(), m).unwrap();
                let nm = apply_tn(&apply_tn(&f, m).unwrap(), n).unwrap();
                let len = mn.prec().min(nm.prec());
                prop_assert_eq!(mn.series.truncate(len).unwrap(), nm.series.truncate(len).unwrap());
            }

            #[test]
            fn tn_matches_divisor_formula_mod_p(
                p in prop::sample::select(vec![5u64, 7]),
                half in 1u32..16,
                n in 1u64..30,
                coords in prop::collection::vec(0u64..100, 1..6),
            ) {
                let f = random_form(p, 2 * half, 30 * 4, &coords);
                let t = apply_tn(&f, n).unwrap();
                for m in 0..t.prec() as u64 {
                    prop_assert_eq!(t.series.coeff(m as usize).unwrap(), tn_coefficient_formula(&f, n, m).unwrap());
                }
            }

            #[test]
            fn up_inverts_vp(
                p in prop::sample::select(vec![5u64, 7]),
                half in 2u32..12,
                coords in prop::collection::vec(0u64..100, 1..6),
            ) {
                let f = random_form(p, 2 * half, 12, &coords);
                let v = apply_vp(&f).unwrap();
                prop_assert_eq!(apply_ul(&v, p).unwrap().series, f.series);
            }

            #[test]
            fn theta_kills_vp_images(
                p in prop::sample::select(vec![5u64, 7]),
                half in 2u32..12,
                coords in prop::collection::vec(0u64..100, 1..6),
            ) {
                let f = random_form(p, 2 * half, 10, &coords);
                let v = spread_vp(&f).unwrap();
                prop_assert!(theta_uncertified(&v).unwrap().series.is_zero());
            }

            #[test]
            fn vp_preserves_nonordinary_parts(p in prop::sample::select(vec![5u64, 7]), half in 6u32..14) {
                let k = 2 * half;
                let c = ctx(p);
                let pk = p as u32 * k;
                let big = basis(c, pk, SpaceKind::Full, p as usize * sturm(pk)).unwrap();
                let dec = ord_no_decompose(&big).unwrap();
                let small = basis(c, k, SpaceKind::Cusp, big.prec().div_ceil(p as usize) + p as usize * sturm(k)).unwrap();
                let no = ord_no_decompose(&small).unwrap().nonordinary;
                for f in no.forms() {
                    let v = spread_vp(&f).unwrap().series.truncate(big.prec()).unwrap();
                    let coords = in_span(&v, &big).unwrap().unwrap();
                    prop_assert!(dec.nonordinary_coords.contains(&coords));
                }
            }
        }
    }
}
