//! Hecke algebras as matrix algebras, duality pairings, the cokernel of the
//! anemic algebra, and the Serre quotient spaces `S(k) = M_k / A M_{k-(p-1)}`.
//!
//! Eigenvalue comparisons go through characteristic polynomials over F_p.
//! Verdicts about `S(k)` are eigensystem-level statements about the
//! q-expansion quotient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldseries::{primes_up_to, FieldContext, QExpansion};
use crate::hecke::{input_precision, map_matrix, operator_matrix, ord_no_decompose, HeckeOperatorLabel};
use crate::level1::{self, in_span, sturm, FormSpace, SpaceKind};
use crate::linalg::{poly, Matrix, SpanSolver, Subspace};

/// Default generator bound: primes up to `max(sturm(k), 7)`.
pub fn default_prime_bound(weight: u32) -> u64 {
    (sturm(weight) as u64).max(7)
}

/// `T_l` for primes `l <= bound`, `l != p`, followed by `U_p` when `include_p`.
pub fn generator_labels(p: u64, bound: u64, include_p: bool) -> Vec<HeckeOperatorLabel> {
    let mut labels: Vec<_> = primes_up_to(bound)
        .into_iter()
        .filter(|&l| l != p)
        .map(HeckeOperatorLabel::T)
        .collect();
    if include_p {
        labels.push(HeckeOperatorLabel::U(p));
    }
    labels
}

/// Precision that lets every generator be evaluated at the Sturm bound of `weight`.
pub fn algebra_precision(p: u64, weight: u32, bound: u64) -> usize {
    generator_labels(p, bound, true)
        .iter()
        .map(|op| input_precision(&[*op], sturm(weight), p))
        .max()
        .unwrap_or(sturm(weight))
}

#[derive(Clone, Debug)]
pub struct HeckeAlgebra {
    pub ambient: FormSpace,
    pub generators: Vec<HeckeOperatorLabel>,
    pub include_p: bool,
    pub basis_matrices: Vec<Matrix>,
    pub dim: usize,
}

impl HeckeAlgebra {
    /// The zero space carries the zero algebra.
    pub fn is_degenerate(&self) -> bool {
        self.ambient.dim() == 0
    }

    /// The algebra as a subspace of vectorized `d x d` matrices.
    pub fn span(&self) -> Subspace {
        let n = self.ambient.dim();
        let vecs: Vec<Vec<u64>> = self.basis_matrices.iter().map(|m| m.entries().to_vec()).collect();
        Subspace::from_vectors(self.ambient.ctx(), n * n, &vecs)
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        self.span().contains(m.entries())
    }
}

/// Unital algebra generated by square matrices of size `n`, as a basis of
/// words discovered breadth-first. Every pairwise product of the basis is
/// re-checked against the span.
pub fn algebra_closure(ctx: FieldContext, n: usize, generators: &[Matrix]) -> Result<Vec<Matrix>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut basis = vec![Matrix::identity(ctx, n)];
    let mut span = Subspace::from_vectors(ctx, n * n, &[basis[0].entries().to_vec()]);
    let mut frontier = 0;
    while frontier < basis.len() {
        let current = basis[frontier].clone();
        frontier += 1;
        for g in generators {
            let w = g.mul(&current);
            if !span.contains(w.entries()) {
                span = span.sum(&Subspace::from_vectors(ctx, n * n, &[w.entries().to_vec()]));
                basis.push(w);
            }
        }
    }
    for a in &basis {
        for b in &basis {
            if !span.contains(a.mul(b).entries()) {
                return Err(Error::Stability("algebra span is not closed under products".into()));
            }
        }
    }
    Ok(basis)
}

pub fn generate_algebra(space: &FormSpace, bound: u64, include_p: bool) -> Result<HeckeAlgebra> {
    let ctx = space.ctx();
    let generators = generator_labels(ctx.p(), bound, include_p);
    let mats = generators
        .iter()
        .map(|op| operator_matrix(space, *op))
        .collect::<Result<Vec<_>>>()?;
    let basis_matrices = algebra_closure(ctx, space.dim(), &mats)?;
    Ok(HeckeAlgebra {
        ambient: space.clone(),
        generators,
        include_p,
        dim: basis_matrices.len(),
        basis_matrices,
    })
}

fn is_cuspidal(space: &FormSpace) -> bool {
    space.kind() != SpaceKind::Full && space.basis().iter().all(|f| f.residues().unwrap()[0] == 0)
}

/// Dimension of `space ∩ Im V_p`, where the image of `V_p` in weight `k` is the
/// span of `V_p(M_j)` over all `j ≡ k (mod p-1)` with `p j <= k`, computed by
/// explicit intersection of q-expansion spans (each image is certified in `M_k`).
pub fn vp_intersection_dim(space: &FormSpace) -> Result<usize> {
    Ok(vp_image_in(space)?.0)
}

fn vp_image_in(space: &FormSpace) -> Result<(usize, Subspace)> {
    let ctx = space.ctx();
    let p = ctx.p() as usize;
    let k = space.weight() as usize;
    let prec = space.prec();
    let full = level1::basis(ctx, space.weight(), SpaceKind::Full, prec)?;
    let mut images: Vec<Vec<u64>> = Vec::new();
    let mut j = k % (p - 1);
    while p * j <= k {
        let src_prec = prec.div_ceil(p).max(sturm(j as u32));
        let mj = level1::basis(ctx, j as u32, SpaceKind::Full, src_prec)?;
        for g in mj.basis() {
            let src = g.residues().unwrap();
            let v: Vec<u64> = (0..prec).map(|n| if n % p == 0 { src[n / p] } else { 0 }).collect();
            let image = QExpansion::residue(ctx, v.clone())?;
            if in_span(&image, &full)?.is_none() {
                return Err(Error::Membership(format!("V_p(M_{j}) is not inside M_{k}")));
            }
            images.push(v);
        }
        j += p - 1;
    }
    let w = Subspace::from_vectors(ctx, prec, &images);
    let rows: Vec<Vec<u64>> = space.basis().iter().map(|f| f.residues().unwrap().to_vec()).collect();
    let s = Subspace::from_vectors(ctx, prec, &rows);
    let inter = s.intersect(&w);
    Ok((inter.dim(), w))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub include_p: bool,
    pub matrix: Vec<Vec<u64>>,
    pub rank: usize,
    pub dim_space: usize,
    pub dim_algebra: usize,
    /// `dim(space ∩ Im V_p)`, computed for anemic algebras only.
    pub dim_vp_intersection: Option<usize>,
    pub perfect: bool,
}

/// `P[i][j] = a_1(T_i f_j)` over the algebra basis and the space basis.
/// Full algebras: perfect iff `rank = dim space = dim alg`. Anemic algebras:
/// iff `rank = dim alg = dim space - dim(space ∩ Im V_p)`.
pub fn duality_pairing(alg: &HeckeAlgebra, space: &FormSpace) -> Result<DualityReport> {
    if !is_cuspidal(space) {
        return Err(Error::Kind("the duality pairing needs a cuspidal space".into()));
    }
    if space.dim() != alg.ambient.dim() || space.weight() != alg.ambient.weight() {
        return Err(Error::Kind("the algebra does not act on this space".into()));
    }
    let ctx = space.ctx();
    let a1: Vec<u64> = space.basis().iter().map(|f| f.residues().unwrap()[1]).collect();
    let matrix: Vec<Vec<u64>> = alg
        .basis_matrices
        .iter()
        .map(|t| {
            (0..space.dim())
                .map(|j| (0..space.dim()).fold(0, |acc, r| ctx.add(acc, ctx.mul(t.get(r, j), a1[r]))))
                .collect()
        })
        .collect();
    let rank = Matrix::from_rows(ctx, space.dim(), &matrix).rank();
    let (dim_vp_intersection, perfect) = if alg.include_p {
        (None, rank == space.dim() && rank == alg.dim)
    } else {
        let v = vp_intersection_dim(space)?;
        (Some(v), rank == alg.dim && rank == space.dim() - v)
    };
    Ok(DualityReport {
        include_p: alg.include_p,
        matrix,
        rank,
        dim_space: space.dim(),
        dim_algebra: alg.dim,
        dim_vp_intersection,
        perfect,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CokernelKind {
    Cusp,
    CuspNonordinary,
}

impl std::str::FromStr for CokernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cusp" => Ok(CokernelKind::Cusp),
            "cusp-nonordinary" | "cusp-no" => Ok(CokernelKind::CuspNonordinary),
            _ => Err(Error::Parse(format!("unknown cokernel kind '{s}'"))),
        }
    }
}

/// Largest `j ≡ k (mod p-1)` with `p j <= k`, if a nonnegative one exists.
pub fn j_of_k(p: u64, k: u32) -> Option<u32> {
    let (p, k) = (p as i64, k as i64);
    let mut j = k / p;
    while j >= 0 && (j - k).rem_euclid(p - 1) != 0 {
        j -= 1;
    }
    (j >= 0).then_some(j as u32)
}

#[derive(Clone, Debug, Serialize)]
pub struct CokernelReport {
    pub p: u64,
    pub weight: u32,
    pub kind: CokernelKind,
    pub prime_bound: u64,
    pub dim_space: usize,
    pub dim_full: usize,
    pub dim_anemic: usize,
    pub dim_cokernel: usize,
    pub dim_vp_intersection: usize,
    pub j_of_k: Option<u32>,
    pub dim_mjk: usize,
    pub verdict: bool,
}

pub fn cokernel_report(ctx: FieldContext, k: u32, kind: CokernelKind) -> Result<CokernelReport> {
    cokernel_report_with(ctx, k, kind, default_prime_bound(k))
}

fn weight_space(ctx: FieldContext, k: u32, kind: CokernelKind, prec: usize) -> Result<FormSpace> {
    let cusp = level1::basis(ctx, k, SpaceKind::Cusp, prec)?;
    match kind {
        CokernelKind::Cusp => Ok(cusp),
        CokernelKind::CuspNonordinary => Ok(ord_no_decompose(&cusp)?.nonordinary),
    }
}

pub fn cokernel_report_with(ctx: FieldContext, k: u32, kind: CokernelKind, bound: u64) -> Result<CokernelReport> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::UnsupportedWeight(k as i64));
    }
    let p = ctx.p();
    let prec = algebra_precision(p, k, bound);
    let space = weight_space(ctx, k, kind, prec)?;
    let full = generate_algebra(&space, bound, true)?;
    let anemic = generate_algebra(&space, bound, false)?;
    let dim_vp_intersection = vp_intersection_dim(&space)?;
    let j = j_of_k(p, k);
    let dim_mjk = match (j, kind) {
        (None, _) => 0,
        (Some(j), CokernelKind::Cusp) => level1::dim_cusp(j),
        (Some(j), CokernelKind::CuspNonordinary) if j < 2 => 0,
        (Some(j), CokernelKind::CuspNonordinary) => {
            let pj = (p as usize * sturm(j)).max(sturm(j));
            weight_space(ctx, j, kind, pj)?.dim()
        }
    };
    let dim_cokernel = full.dim - anemic.dim;
    Ok(CokernelReport {
        p,
        weight: k,
        kind,
        prime_bound: bound,
        dim_space: space.dim(),
        dim_full: full.dim,
        dim_anemic: anemic.dim,
        dim_cokernel,
        dim_vp_intersection,
        j_of_k: j,
        dim_mjk,
        verdict: dim_cokernel == dim_mjk && dim_cokernel == dim_vp_intersection,
    })
}

/// `S(k) = M_k / A M_{k-(p-1)}` with an adapted basis of `M_k`: the echelon
/// basis of the Hasse subspace first, then standard complement vectors.
#[derive(Clone, Debug)]
pub struct SerreQuotientSpace {
    pub weight: u32,
    pub ambient: FormSpace,
    pub subspace: Subspace,
    pub dim: usize,
    adapted: Vec<Vec<u64>>,
}

/// Precision of `M_k` needed to induce `T_l` for every prime `l <= max_l`.
pub fn quotient_precision(weight: u32, max_l: u64) -> usize {
    sturm(weight) * max_l.max(1) as usize
}

pub fn serre_quotient(ctx: FieldContext, k: u32, prec: usize) -> Result<SerreQuotientSpace> {
    let p = ctx.p() as u32;
    let ambient = level1::basis(ctx, k, SpaceKind::Full, prec)?;
    let n = ambient.dim();
    let subspace = if k >= p - 1 {
        let lower = level1::basis(ctx, k - (p - 1), SpaceKind::Full, prec)?;
        let mut coords = Vec::with_capacity(lower.dim());
        for g in lower.basis() {
            coords.push(in_span(g, &ambient)?.ok_or_else(|| {
                Error::Membership(format!("A M_{} is not inside M_{k}", k - (p - 1)))
            })?);
        }
        Subspace::from_vectors(ctx, n, &coords)
    } else {
        Subspace::zero(ctx, n)
    };
    let mut adapted = subspace.basis().to_vec();
    let mut pivots = Vec::new();
    for row in subspace.basis() {
        pivots.push(row.iter().position(|&x| x != 0).unwrap());
    }
    for c in (0..n).filter(|c| !pivots.contains(c)) {
        let mut e = vec![0; n];
        e[c] = 1;
        adapted.push(e);
    }
    Ok(SerreQuotientSpace { weight: k, dim: n - subspace.dim(), ambient, subspace, adapted })
}

impl SerreQuotientSpace {
    pub fn p(&self) -> u64 {
        self.ambient.ctx().p()
    }

    /// Matrix of the operator induced on the quotient, in the complement basis.
    pub fn induced_matrix(&self, op: HeckeOperatorLabel) -> Result<Matrix> {
        let ctx = self.ambient.ctx();
        if op.involves(ctx.p()) {
            return Err(Error::BadPrime(ctx.p()));
        }
        let n = self.ambient.dim();
        let s = self.subspace.dim();
        if self.dim == 0 {
            return Ok(Matrix::zeros(ctx, 0, 0));
        }
        let m = operator_matrix(&self.ambient, op)?;
        let solver = SpanSolver::new(ctx, n, &self.adapted);
        let mut cols = Vec::with_capacity(n);
        for v in &self.adapted {
            cols.push(solver.solve(&m.mul_vec(v)).expect("adapted basis spans"));
        }
        for (j, col) in cols.iter().enumerate().take(s) {
            if col[s..].iter().any(|&x| x != 0) {
                return Err(Error::Stability(format!(
                    "{op} moves basis vector {j} of A M_{} out of the subspace",
                    self.weight as u64 + 1 - ctx.p()
                )));
            }
        }
        let block: Vec<Vec<u64>> = cols[s..].iter().map(|c| c[s..].to_vec()).collect();
        Ok(Matrix::from_columns(ctx, self.dim, &block))
    }

    pub fn charpoly(&self, op: HeckeOperatorLabel) -> Result<Vec<u64>> {
        Ok(self.induced_matrix(op)?.charpoly())
    }
}

fn op_prime(op: HeckeOperatorLabel) -> u64 {
    match op {
        HeckeOperatorLabel::T(n) | HeckeOperatorLabel::U(n) => n,
        _ => 1,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharpolyComparison {
    pub p: u64,
    pub operator: String,
    pub weights: (u32, u32),
    pub dims: (usize, usize),
    pub charpolys: (Vec<u64>, Vec<u64>),
    /// The charpoly the second space is compared against.
    pub expected: Vec<u64>,
    pub divides: bool,
    pub verdict: bool,
    pub level: &'static str,
}

fn compare(
    ctx: FieldContext,
    op: HeckeOperatorLabel,
    k1: u32,
    k2: u32,
    transform: impl Fn(&[u64]) -> Vec<u64>,
) -> Result<CharpolyComparison> {
    let l = op_prime(op);
    let s1 = serre_quotient(ctx, k1, quotient_precision(k1, l))?;
    let s2 = serre_quotient(ctx, k2, quotient_precision(k2, l))?;
    let c1 = s1.charpoly(op)?;
    let c2 = s2.charpoly(op)?;
    let expected = transform(&c1);
    let divides = poly::divides(ctx, &expected, &c2);
    Ok(CharpolyComparison {
        p: ctx.p(),
        operator: op.to_string(),
        weights: (k1, k2),
        dims: (s1.dim, s2.dim),
        verdict: s1.dim == s2.dim && expected == c2,
        charpolys: (c1, c2),
        expected,
        divides,
        level: "eigensystem-level",
    })
}

/// Charpoly of `op` on `S(k)` versus `S(k + p^2 - 1)`.
pub fn periodicity_check(ctx: FieldContext, k: u32, op: HeckeOperatorLabel) -> Result<CharpolyComparison> {
    let p = ctx.p() as u32;
    compare(ctx, op, k, k + p * p - 1, |c| c.to_vec())
}

/// `charpoly_{S(k+p+1)}(x) = l^d charpoly_{S(k)}(x / l)` for `T_l`.
pub fn twist_check(ctx: FieldContext, k: u32, l: u64) -> Result<CharpolyComparison> {
    let p = ctx.p() as u32;
    compare(ctx, HeckeOperatorLabel::T(l), k, k + p + 1, |c| poly::rescale_root(ctx, c, l))
}

/// Charpoly of `T_l` on `S(k)` versus `S(pk)`.
pub fn k_pk_check(ctx: FieldContext, k: u32, l: u64) -> Result<CharpolyComparison> {
    let p = ctx.p() as u32;
    compare(ctx, HeckeOperatorLabel::T(l), k, p * k, |c| c.to_vec())
}

/// Dimension of `{v in S(k) : (T_l - lambda_l) v = 0 for all l}`.
pub fn socle_dim(ctx: FieldContext, k: u32, eigensystem: &[(u64, u64)]) -> Result<usize> {
    let max_l = eigensystem.iter().map(|e| e.0).max().unwrap_or(1);
    let s = serre_quotient(ctx, k, quotient_precision(k, max_l))?;
    if s.dim == 0 {
        return Ok(0);
    }
    let mut rows = Vec::new();
    for &(l, lambda) in eigensystem {
        rows.extend(s.induced_matrix(HeckeOperatorLabel::T(l))?.shift(lambda % ctx.p()).to_rows());
    }
    Ok(s.dim - Matrix::from_rows(ctx, s.dim, &rows).rank())
}

#[derive(Clone, Debug, Serialize)]
pub struct HasseRestrictionReport {
    pub p: u64,
    pub weight: u32,
    pub dim_source_algebra: usize,
    pub dim_target_algebra: usize,
    pub rank_image: usize,
    pub surjective: bool,
}

/// Restricts `T(S_{k+p-1})` along `A S_k` and compares with `T(S_k)`.
/// A basis element not preserving `A S_k` is a [`Error::Stability`].
pub fn hasse_restriction_check(ctx: FieldContext, k: u32) -> Result<HasseRestrictionReport> {
    let p = ctx.p();
    let big = k + p as u32 - 1;
    let bound_big = default_prime_bound(big);
    let bound_small = default_prime_bound(k);
    let prec = algebra_precision(p, big, bound_big).max(algebra_precision(p, k, bound_small));
    let source = level1::basis(ctx, big, SpaceKind::Cusp, prec)?;
    let target = level1::basis(ctx, k, SpaceKind::Cusp, prec)?;
    let alg_big = generate_algebra(&source, bound_big, true)?;
    let alg_small = generate_algebra(&target, bound_small, true)?;
    let n = target.dim();
    let embed = map_matrix_hasse(&target, &source)?;
    let emb_cols: Vec<Vec<u64>> = (0..n).map(|j| embed.column(j)).collect();
    let solver = SpanSolver::new(ctx, source.dim(), &emb_cols);
    let mut images = Vec::with_capacity(alg_big.dim);
    for t in &alg_big.basis_matrices {
        let mut cols = Vec::with_capacity(n);
        for c in &emb_cols {
            cols.push(solver.solve(&t.mul_vec(c)).ok_or_else(|| {
                Error::Stability(format!("a Hecke operator does not preserve A S_{k} inside S_{big}"))
            })?);
        }
        images.push(Matrix::from_columns(ctx, n, &cols).entries().to_vec());
    }
    let image = Subspace::from_vectors(ctx, n * n, &images);
    let target_span = alg_small.span();
    Ok(HasseRestrictionReport {
        p,
        weight: k,
        dim_source_algebra: alg_big.dim,
        dim_target_algebra: alg_small.dim,
        rank_image: image.dim(),
        surjective: image == target_span,
    })
}

/// Coordinates of `A f_j` (same q-expansion) in the basis of `target`.
fn map_matrix_hasse(source: &FormSpace, target: &FormSpace) -> Result<Matrix> {
    let ctx = source.ctx();
    let mut cols = Vec::with_capacity(source.dim());
    for f in source.basis() {
        cols.push(in_span(f, target)?.ok_or_else(|| {
            Error::Membership(format!("A S_{} is not inside S_{}", source.weight(), target.weight()))
        })?);
    }
    Ok(Matrix::from_columns(ctx, target.dim(), &cols))
}

/// Matrix of `theta: M_k -> M_{k+p+1}` and its kernel, for the Katz comparison.
pub fn theta_kernel(ctx: FieldContext, k: u32, prec: usize) -> Result<(Subspace, Subspace)> {
    let p = ctx.p() as u32;
    let prec = prec.max(sturm(k + p + 1));
    let source = level1::basis(ctx, k, SpaceKind::Full, prec)?;
    let target = level1::basis(ctx, k + p + 1, SpaceKind::Full, prec)?;
    let theta = map_matrix(&source, &target, HeckeOperatorLabel::Theta)?;
    let kernel = Subspace::from_vectors(ctx, source.dim(), &theta.kernel());
    let (_, w) = vp_image_in(&source)?;
    let sv = SpanSolver::new(
        ctx,
        prec,
        &source.basis().iter().map(|f| f.residues().unwrap().to_vec()).collect::<Vec<_>>(),
    );
    let w_coords: Vec<Vec<u64>> = w.basis().iter().map(|v| sv.solve(v).expect("certified in M_k")).collect();
    Ok((kernel, Subspace::from_vectors(ctx, source.dim(), &w_coords)))
}
