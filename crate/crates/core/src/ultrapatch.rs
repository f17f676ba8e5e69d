//! Finite-scale ultraproducts and the patching functor.
//!
//! The base ring is `S = F_p[y]/(y^N)`, either a truncated power series ring
//! or the group algebra `F_p[Z/p^m]` (with `y = g - 1`, `N = p^m`). Open
//! ideals are the powers `(y^d)`, and `I_n = (y^n)`. A finite S-module is an
//! F_p-space with a nilpotent matrix for `y`; its isomorphism class is its
//! Jordan type, which over `S` is the list of invariant factors.
//!
//! A genuine non-principal ultrafilter is replaced by a deterministic
//! [`Selector`] on eventually periodic sequences; reports name the selector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldseries::FieldContext;
use crate::linalg::{Matrix, Subspace};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseKind {
    PowerSeries { trunc: usize },
    GroupAlgebra { m: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseRing {
    ctx: FieldContext,
    kind: BaseKind,
    n: usize,
    chain: Vec<usize>,
}

impl BaseRing {
    /// `chain` lists the exponents `d_i` of the ideals `a_i = (y^{d_i})`;
    /// an empty chain means `1, 2, ..., N`.
    pub fn new(ctx: FieldContext, kind: BaseKind, chain: Vec<usize>) -> Result<Self> {
        let n = match kind {
            BaseKind::PowerSeries { trunc } => trunc,
            BaseKind::GroupAlgebra { m } => (ctx.p() as usize).pow(m),
        };
        if n == 0 || n > 4096 {
            return Err(Error::Invalid(format!("base length {n} outside 1..=4096")));
        }
        let chain = if chain.is_empty() { (1..=n).collect() } else { chain };
        if chain.windows(2).any(|w| w[0] > w[1]) || chain.iter().any(|&d| d == 0 || d > n) {
            return Err(Error::Invalid("ideal chain must be descending with exponents in 1..=N".into()));
        }
        Ok(BaseRing { ctx, kind, n, chain })
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    /// `N` with `S = F_p[y]/(y^N)`.
    pub fn length(&self) -> usize {
        self.n
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    /// `S^r / (S-span of the relation vectors)`. Each relation lists one
    /// polynomial in `y` (coefficients low to high) per generator.
    pub fn present(&self, gens: usize, relations: &[Vec<Vec<u64>>]) -> Result<PresentedModule> {
        let (ctx, n) = (self.ctx, self.n);
        let dim = gens * n;
        let mut y = Matrix::zeros(ctx, dim, dim);
        for i in 0..gens {
            for j in 0..n - 1 {
                y.set(i * n + j + 1, i * n + j, 1);
            }
        }
        let mut vectors = Vec::new();
        for rel in relations {
            if rel.len() != gens {
                return Err(Error::Invalid(format!("relation has {} entries for {gens} generators", rel.len())));
            }
            let mut v = vec![0u64; dim];
            for (i, poly) in rel.iter().enumerate() {
                for (j, &c) in poly.iter().enumerate().take(n) {
                    v[i * n + j] = ctx.add(v[i * n + j], c % ctx.p());
                }
            }
            for _ in 0..n {
                vectors.push(v.clone());
                v = y.mul_vec(&v);
            }
        }
        let free = FinModule { ctx, y };
        let sub = Subspace::from_vectors(ctx, dim, &vectors);
        let (module, proj, lifts) = free.quotient(&sub)?;
        Ok(PresentedModule { module, gens, n, proj, lifts })
    }

    /// `S/(y^{d_1}) ⊕ S/(y^{d_2}) ⊕ ...`.
    pub fn cyclic_sum(&self, exps: &[usize]) -> Result<PresentedModule> {
        let gens = exps.len();
        let relations: Vec<Vec<Vec<u64>>> = exps
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut rel = vec![Vec::new(); gens];
                let mut poly = vec![0; d + 1];
                poly[d] = 1;
                rel[i] = poly;
                rel
            })
            .collect();
        self.present(gens, &relations)
    }

    /// `S^r`.
    pub fn free(&self, rank: usize) -> Result<PresentedModule> {
        self.present(rank, &[])
    }
}

/// A finite S-module: an F_p-space of dimension `y.rows()` with the action of `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinModule {
    ctx: FieldContext,
    y: Matrix,
}

impl FinModule {
    pub fn zero(ctx: FieldContext) -> Self {
        FinModule { ctx, y: Matrix::zeros(ctx, 0, 0) }
    }

    pub fn dim(&self) -> usize {
        self.y.rows()
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    /// Jordan block sizes of `y` in decreasing order (the invariant factors).
    pub fn signature(&self) -> Vec<usize> {
        let mut ranks = vec![self.dim()];
        let mut power = Matrix::identity(self.ctx, self.dim());
        while *ranks.last().unwrap() > 0 {
            power = power.mul(&self.y);
            let r = power.rank();
            if r == *ranks.last().unwrap() {
                break;
            }
            ranks.push(r);
        }
        let mut sizes = Vec::new();
        for j in 1..ranks.len() {
            let at_least_j = ranks[j - 1] - ranks[j];
            let at_least_next = if j + 1 < ranks.len() { ranks[j] - ranks[j + 1] } else { ranks[j] };
            sizes.extend(std::iter::repeat_n(j, at_least_j - at_least_next));
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Minimal number of generators, `dim M / yM`.
    pub fn generator_count(&self) -> usize {
        self.dim() - self.y.rank()
    }

    pub fn is_annihilated_by(&self, d: usize) -> bool {
        self.y.pow(d as u64).is_zero()
    }

    /// Quotient by a `y`-stable subspace: the module, the projection matrix, and
    /// the ambient coordinates used as lifts of the quotient basis.
    fn quotient(&self, sub: &Subspace) -> Result<(FinModule, Matrix, Vec<usize>)> {
        let ctx = self.ctx;
        let n = self.dim();
        for u in sub.basis() {
            if !sub.contains(&self.y.mul_vec(u)) {
                return Err(Error::Invalid("submodule is not stable under y".into()));
            }
        }
        let pivots: Vec<usize> = sub.basis().iter().map(|r| r.iter().position(|&x| x != 0).unwrap()).collect();
        let lifts: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let reduce = |mut v: Vec<u64>| -> Vec<u64> {
            for (row, &pc) in sub.basis().iter().zip(&pivots) {
                let f = v[pc];
                if f != 0 {
                    for (slot, &x) in v.iter_mut().zip(row) {
                        *slot = ctx.sub(*slot, ctx.mul(f, x));
                    }
                }
            }
            lifts.iter().map(|&c| v[c]).collect()
        };
        let proj_cols: Vec<Vec<u64>> = (0..n)
            .map(|c| {
                let mut e = vec![0; n];
                e[c] = 1;
                reduce(e)
            })
            .collect();
        let proj = Matrix::from_columns(ctx, lifts.len(), &proj_cols);
        let y_cols: Vec<Vec<u64>> = lifts.iter().map(|&c| reduce(self.y.column(c))).collect();
        let y = Matrix::from_columns(ctx, lifts.len(), &y_cols);
        Ok((FinModule { ctx, y }, proj, lifts))
    }

    /// `M ⊗ S/(y^d)` with its projection from `M` and the lifts of its basis.
    pub fn tensor_quotient(&self, d: usize) -> (FinModule, Matrix, Vec<usize>) {
        let image = self.y.pow(d as u64).column_space();
        self.quotient(&image).expect("y^d M is y-stable")
    }
}

/// A module built from a presentation, remembering how its basis lifts to `S^r`.
#[derive(Clone, Debug)]
pub struct PresentedModule {
    pub module: FinModule,
    gens: usize,
    n: usize,
    proj: Matrix,
    lifts: Vec<usize>,
}

impl PresentedModule {
    /// The S-linear map sending generator `i` to `images[i]` (one polynomial per
    /// generator of `target`). Fails unless the map is well defined.
    pub fn map_to(&self, target: &PresentedModule, images: &[Vec<Vec<u64>>]) -> Result<Matrix> {
        let ctx = self.module.ctx;
        if images.len() != self.gens || images.iter().any(|im| im.len() != target.gens) {
            return Err(Error::Invalid("map images do not match the generator counts".into()));
        }
        let ambient = target.gens * target.n;
        let mut cols = Vec::with_capacity(self.lifts.len());
        for &c in &self.lifts {
            let (i, j) = (c / self.n, c % self.n);
            let mut v = vec![0u64; ambient];
            for (t, poly) in images[i].iter().enumerate() {
                for (e, &coef) in poly.iter().enumerate() {
                    if e + j < target.n {
                        let slot = t * target.n + e + j;
                        v[slot] = ctx.add(v[slot], coef % ctx.p());
                    }
                }
            }
            cols.push(target.proj.mul_vec(&v));
        }
        let f = Matrix::from_columns(ctx, target.module.dim(), &cols);
        if f.mul(&self.module.y) != target.module.y.mul(&f) {
            return Err(Error::Invalid("generator images do not define an S-linear map".into()));
        }
        Ok(f)
    }
}

/// Deterministic stand-in for a non-principal ultrafilter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// Among classes occurring infinitely often, the one whose first index is least.
    #[default]
    LeastIndex,
    /// The same rule restricted to indices `n ≡ residue (mod modulus)`.
    Residue { modulus: usize, residue: usize },
}

impl Selector {
    fn admits(&self, n: usize) -> bool {
        match *self {
            Selector::LeastIndex => true,
            Selector::Residue { modulus, residue } => n % modulus == residue % modulus,
        }
    }

    fn modulus(&self) -> usize {
        match *self {
            Selector::LeastIndex => 1,
            Selector::Residue { modulus, .. } => modulus,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.modulus() == 0 {
            return Err(Error::Invalid("selector modulus must be positive".into()));
        }
        Ok(())
    }
}

/// Eventually periodic sequence: `prefix[0..L]`, then `period` repeated.
#[derive(Clone, Debug)]
pub struct Periodic<T> {
    pub prefix: Vec<T>,
    pub period: Vec<T>,
}

impl<T> Periodic<T> {
    pub fn new(prefix: Vec<T>, period: Vec<T>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Invalid("the periodic part must be nonempty".into()));
        }
        Ok(Periodic { prefix, period })
    }

    pub fn get(&self, n: usize) -> &T {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// Number of leading indices that exhibit every class and every residue.
    fn horizon(&self, modulus: usize) -> usize {
        let p = self.period.len();
        self.prefix.len() + p * modulus / gcd(p, modulus)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug)]
pub struct ModuleSequence {
    pub base: BaseRing,
    pub generator_bound: usize,
    pub entries: Periodic<FinModule>,
}

impl ModuleSequence {
    pub fn new(base: BaseRing, generator_bound: usize, entries: Periodic<FinModule>) -> Result<Self> {
        let seq = ModuleSequence { base, generator_bound, entries };
        for n in 0..seq.entries.horizon(1) {
            let g = seq.entries.get(n).generator_count();
            if g > generator_bound {
                return Err(Error::Invalid(format!("entry {n} needs {g} generators, bound is {generator_bound}")));
            }
        }
        Ok(seq)
    }

    pub fn constant(base: BaseRing, m: FinModule) -> Result<Self> {
        let r = m.generator_count();
        Self::new(base, r, Periodic::new(Vec::new(), vec![m])?)
    }

    /// `M_n = M ⊗ S/I_n` with `I_n = (y^n)`; constant from `n = N` on.
    pub fn family(base: BaseRing, m: &FinModule) -> Result<Self> {
        let prefix = (0..base.n).map(|n| m.tensor_quotient(n).0).collect();
        let r = m.generator_count();
        Self::new(base, r, Periodic::new(prefix, vec![m.clone()])?)
    }

    /// Indices `n` (within the horizon) where `M_n` is not killed by `I_n`.
    pub fn annihilation_violations(&self) -> Vec<usize> {
        (0..self.entries.horizon(1))
            .filter(|&n| n < self.base.n && !self.entries.get(n).is_annihilated_by(n))
            .collect()
    }

    /// Entrywise `⊗ S/(y^b)`.
    pub fn base_change(&self, b: usize) -> Result<Self> {
        let f = |m: &FinModule| m.tensor_quotient(b).0;
        let entries = Periodic::new(
            self.entries.prefix.iter().map(f).collect(),
            self.entries.period.iter().map(f).collect(),
        )?;
        Self::new(self.base.clone(), self.generator_bound, entries)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub signature: Vec<usize>,
    pub first_index: usize,
    pub recurrent: bool,
}

/// Selects the class of `keys` chosen by the selector and returns its least admissible index.
fn select<K: Ord + Clone>(
    keys: &[K],
    prefix_len: usize,
    sel: &Selector,
) -> Result<(usize, BTreeMap<K, (usize, bool)>)> {
    let mut classes: BTreeMap<K, (usize, bool)> = BTreeMap::new();
    for (n, k) in keys.iter().enumerate() {
        let e = classes.entry(k.clone()).or_insert((n, false));
        if n >= prefix_len && sel.admits(n) {
            e.1 = true;
        }
    }
    let witness = keys
        .iter()
        .enumerate()
        .filter(|(n, k)| sel.admits(*n) && classes[*k].1)
        .map(|(n, _)| n)
        .next()
        .ok_or_else(|| Error::Classification("no class occurs infinitely often under the selector".into()))?;
    Ok((witness, classes))
}

#[derive(Clone, Debug)]
pub struct Ultraproduct {
    pub module: FinModule,
    pub witness: usize,
    pub signature: Vec<usize>,
    pub classes: Vec<ClassSummary>,
}

/// Ultraproduct of `M_n ⊗ S/(y^d)` under the selector.
pub fn ultraproduct(seq: &ModuleSequence, d: usize, sel: &Selector) -> Result<Ultraproduct> {
    sel.validate()?;
    let horizon = seq.entries.horizon(sel.modulus());
    let keys: Vec<Vec<usize>> = (0..horizon).map(|n| seq.entries.get(n).tensor_quotient(d).0.signature()).collect();
    let (witness, classes) = select(&keys, seq.entries.prefix.len(), sel)?;
    let module = seq.entries.get(witness).tensor_quotient(d).0;
    let classes = classes
        .into_iter()
        .map(|(signature, (first_index, recurrent))| ClassSummary { signature, first_index, recurrent })
        .collect();
    Ok(Ultraproduct { signature: module.signature(), module, witness, classes })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityCertificate {
    pub transitions_surjective: bool,
    pub kernels_match: bool,
    pub squares_commute: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub ideal_exponent: usize,
    pub signature: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PatchResult {
    pub witness: usize,
    pub depth: usize,
    pub levels: Vec<LevelSummary>,
    pub module: FinModule,
    pub certificate: CompatibilityCertificate,
}

/// Depth-limited inverse limit of the ultraproducts along `a_1 ⊇ ... ⊇ a_depth`.
/// The witness is resolved at the finest level and used at every level, so the
/// transition maps are induced by one entry.
pub fn patch(seq: &ModuleSequence, sel: &Selector, depth: usize) -> Result<PatchResult> {
    let chain = seq.base.chain();
    if depth == 0 || depth > chain.len() {
        return Err(Error::Invalid(format!("depth {depth} outside 1..={}", chain.len())));
    }
    let finest = ultraproduct(seq, chain[depth - 1], sel)?;
    let witness = finest.witness;
    let m = seq.entries.get(witness);
    let levels: Vec<(FinModule, Matrix, Vec<usize>)> =
        chain[..depth].iter().map(|&d| m.tensor_quotient(d)).collect();
    let certificate = certify_levels(m, &chain[..depth], &levels)?;
    let summaries = chain[..depth]
        .iter()
        .zip(&levels)
        .map(|(&d, l)| LevelSummary { ideal_exponent: d, signature: l.0.signature() })
        .collect();
    Ok(PatchResult {
        witness,
        depth,
        levels: summaries,
        module: levels[depth - 1].0.clone(),
        certificate,
    })
}

/// Transition `U_{i+1} -> U_i` induced by the identity of `M`.
fn transition(fine: &(FinModule, Matrix, Vec<usize>), coarse: &(FinModule, Matrix, Vec<usize>)) -> Matrix {
    let cols: Vec<Vec<u64>> = fine.2.iter().map(|&c| coarse.1.column(c)).collect();
    Matrix::from_columns(fine.0.ctx, coarse.0.dim(), &cols)
}

fn certify_levels(
    m: &FinModule,
    exps: &[usize],
    levels: &[(FinModule, Matrix, Vec<usize>)],
) -> Result<CompatibilityCertificate> {
    let mut cert = CompatibilityCertificate { transitions_surjective: true, kernels_match: true, squares_commute: true };
    for i in 0..levels.len().saturating_sub(1) {
        let (coarse, fine) = (&levels[i], &levels[i + 1]);
        let t = transition(fine, coarse);
        cert.transitions_surjective &= t.rank() == coarse.0.dim();
        let kernel = Subspace::from_vectors(m.ctx, fine.0.dim(), &t.kernel());
        let ideal_image = fine.0.y.pow(exps[i] as u64).column_space();
        cert.kernels_match &= kernel == ideal_image;
        cert.squares_commute &= t.mul(&fine.1) == coarse.1 && t.mul(&fine.0.y) == coarse.0.y.mul(&t);
        if i + 2 < levels.len() {
            let finer = &levels[i + 2];
            let composite = t.mul(&transition(finer, fine));
            cert.squares_commute &= composite == transition(finer, coarse);
        }
    }
    if !(cert.transitions_surjective && cert.kernels_match && cert.squares_commute) {
        return Err(Error::Compatibility(format!("patching transition maps failed: {cert:?}")));
    }
    Ok(cert)
}

/// `A --f--> B --g--> C -> 0` at one index.
#[derive(Clone, Debug)]
pub struct ExactTriple {
    pub a: FinModule,
    pub b: FinModule,
    pub c: FinModule,
    pub f: Matrix,
    pub g: Matrix,
}

impl ExactTriple {
    fn check(&self, split: bool) -> std::result::Result<(), String> {
        let (f, g) = (&self.f, &self.g);
        if f.rows() != self.b.dim() || f.cols() != self.a.dim() || g.rows() != self.c.dim() || g.cols() != self.b.dim() {
            return Err("map shapes do not match the modules".into());
        }
        if f.mul(self.a.y()) != self.b.y().mul(f) || g.mul(self.b.y()) != self.c.y().mul(g) {
            return Err("maps are not S-linear".into());
        }
        if !g.mul(f).is_zero() || f.rank() != self.b.dim() - g.rank() {
            return Err("image of f differs from kernel of g".into());
        }
        if g.rank() != self.c.dim() {
            return Err("g is not surjective".into());
        }
        if split {
            if f.rank() != self.a.dim() {
                return Err("f is not injective".into());
            }
            let mut ac = self.a.signature();
            ac.extend(self.c.signature());
            ac.sort_unstable_by(|x, y| y.cmp(x));
            if ac != self.b.signature() {
                return Err("middle term is not the direct sum of the outer terms".into());
            }
        }
        Ok(())
    }

    fn tensor(&self, d: usize) -> ExactTriple {
        let (a, _, a_lifts) = self.a.tensor_quotient(d);
        let (b, b_proj, b_lifts) = self.b.tensor_quotient(d);
        let (c, c_proj, _) = self.c.tensor_quotient(d);
        let f_cols: Vec<Vec<u64>> = a_lifts.iter().map(|&j| b_proj.mul_vec(&self.f.column(j))).collect();
        let g_cols: Vec<Vec<u64>> = b_lifts.iter().map(|&j| c_proj.mul_vec(&self.g.column(j))).collect();
        let ctx = self.a.ctx;
        ExactTriple {
            f: Matrix::from_columns(ctx, b.dim(), &f_cols),
            g: Matrix::from_columns(ctx, c.dim(), &g_cols),
            a,
            b,
            c,
        }
    }

    fn key(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        (self.a.signature(), self.b.signature(), self.c.signature())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub witness: usize,
    pub depth: usize,
    pub split: bool,
    /// Per level: right exactness (and split exactness when requested).
    pub level_verdicts: Vec<bool>,
    pub verdict: bool,
}

/// Checks the inputs entrywise, then patches `A -> B -> C -> 0` to `depth`.
pub fn patch_exactness_check(
    base: &BaseRing,
    triples: &Periodic<ExactTriple>,
    split: bool,
    sel: &Selector,
    depth: usize,
) -> Result<ExactnessReport> {
    sel.validate()?;
    let chain = base.chain();
    if depth == 0 || depth > chain.len() {
        return Err(Error::Invalid(format!("depth {depth} outside 1..={}", chain.len())));
    }
    let horizon = triples.horizon(sel.modulus());
    for n in 0..horizon {
        triples.get(n).check(split).map_err(|reason| Error::InputNotExact { index: n, reason })?;
    }
    let finest = chain[depth - 1];
    let keys: Vec<_> = (0..horizon).map(|n| triples.get(n).tensor(finest).key()).collect();
    let (witness, _) = select(&keys, triples.prefix.len(), sel)?;
    let t = triples.get(witness);
    let level_verdicts: Vec<bool> = chain[..depth].iter().map(|&d| t.tensor(d).check(split).is_ok()).collect();
    Ok(ExactnessReport { witness, depth, split, verdict: level_verdicts.iter().all(|&v| v), level_verdicts })
}

/// Whether a module is free of rank `r` over `S/(y^d)`.
pub fn is_free_of_rank(m: &FinModule, r: usize, d: usize) -> bool {
    m.signature() == vec![d; r]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize) -> BaseRing {
        BaseRing::new(FieldContext::new(5).unwrap(), BaseKind::PowerSeries { trunc: n }, Vec::new()).unwrap()
    }

    #[test]
    fn presentations_and_signatures() {
        let s = base(6);
        assert_eq!(s.cyclic_sum(&[2, 1]).unwrap().module.signature(), vec![2, 1]);
        assert_eq!(s.free(2).unwrap().module.signature(), vec![6, 6]);
        // S^2 / (y^2 e1 - y e2, y^3 e2): a non-diagonal presentation
        let m = s.present(2, &[vec![vec![0, 0, 1], vec![0, 4]], vec![vec![], vec![0, 0, 0, 1]]]).unwrap();
        let sig = m.module.signature();
        assert_eq!(sig.iter().sum::<usize>(), m.module.dim());
        assert_eq!(m.module.generator_count(), 2);
        let g = BaseRing::new(FieldContext::new(5).unwrap(), BaseKind::GroupAlgebra { m: 1 }, Vec::new()).unwrap();
        assert_eq!(g.length(), 5);
    }

    #[test]
    fn ultraproduct_examples() {
        let s = base(6);
        let m = s.cyclic_sum(&[4, 2]).unwrap().module;
        let seq = ModuleSequence::constant(s.clone(), m.clone()).unwrap();
        let u = ultraproduct(&seq, 3, &Selector::LeastIndex).unwrap();
        assert_eq!((u.witness, u.signature.clone()), (0, vec![3, 2]));

        let a = s.cyclic_sum(&[1]).unwrap().module;
        let b = s.cyclic_sum(&[2]).unwrap().module;
        let alt = ModuleSequence::new(s.clone(), 1, Periodic::new(vec![], vec![a, b]).unwrap()).unwrap();
        let u = ultraproduct(&alt, 6, &Selector::Residue { modulus: 2, residue: 0 }).unwrap();
        assert_eq!(u.signature, vec![1]);
        assert_eq!(u.witness % 2, 0);

        let fam = ModuleSequence::family(s.clone(), &s.free(1).unwrap().module).unwrap();
        let u = ultraproduct(&fam, 3, &Selector::LeastIndex).unwrap();
        assert_eq!(u.signature, vec![3]);
        assert!(u.witness >= 3);
        assert!(fam.annihilation_violations().is_empty());
    }

    #[test]
    fn patch_examples() {
        let s = base(6);
        let m = s.cyclic_sum(&[5, 3, 1]).unwrap().module;
        let seq = ModuleSequence::constant(s.clone(), m.clone()).unwrap();
        for depth in 1..=6 {
            let p = patch(&seq, &Selector::LeastIndex, depth).unwrap();
            assert_eq!(p.module.signature(), m.tensor_quotient(depth).0.signature());
        }
        let fam = ModuleSequence::family(s.clone(), &m).unwrap();
        let p = patch(&fam, &Selector::LeastIndex, 5).unwrap();
        assert_eq!(p.module.signature(), vec![5, 3, 1]);

        let free = ModuleSequence::family(s.clone(), &s.free(2).unwrap().module).unwrap();
        let p = patch(&free, &Selector::LeastIndex, 4).unwrap();
        assert!(is_free_of_rank(&p.module, 2, 4));
    }

    #[test]
    fn base_change_commutes_with_patching() {
        let s = base(6);
        let m = s.cyclic_sum(&[6, 4, 1]).unwrap().module;
        let fam = ModuleSequence::family(s.clone(), &m).unwrap();
        for b in 1..=6 {
            let lhs = patch(&fam, &Selector::LeastIndex, 6).unwrap().module.tensor_quotient(b).0;
            let rhs = patch(&fam.base_change(b).unwrap(), &Selector::LeastIndex, 6).unwrap().module;
            assert_eq!(lhs.signature(), rhs.signature());
        }
    }

    #[test]
    fn exactness_examples() {
        let s = base(4);
        let ctx = s.ctx();
        // split: 0 -> S/(y) -> S/(y) ⊕ S/(y^2) -> S/(y^2) -> 0
        let a = s.cyclic_sum(&[1]).unwrap();
        let b = s.cyclic_sum(&[1, 2]).unwrap();
        let c = s.cyclic_sum(&[2]).unwrap();
        let f = a.map_to(&b, &[vec![vec![1], vec![]]]).unwrap();
        let g = b.map_to(&c, &[vec![vec![]], vec![vec![1]]]).unwrap();
        let t = ExactTriple { a: a.module.clone(), b: b.module.clone(), c: c.module.clone(), f, g };
        let seq = Periodic::new(vec![], vec![t.clone()]).unwrap();
        let r = patch_exactness_check(&s, &seq, true, &Selector::LeastIndex, 4).unwrap();
        assert!(r.verdict);

        // 0 -> F -> F -> 0
        let one = s.cyclic_sum(&[1]).unwrap();
        let zero = FinModule::zero(ctx);
        let iso = Matrix::identity(ctx, 1);
        let pad = ExactTriple {
            a: zero.clone(),
            b: one.module.clone(),
            c: one.module.clone(),
            f: Matrix::zeros(ctx, 1, 0),
            g: iso,
        };
        let r = patch_exactness_check(&s, &Periodic::new(vec![], vec![pad]).unwrap(), false, &Selector::LeastIndex, 2)
            .unwrap();
        assert!(r.verdict);

        let mut broken = t.clone();
        broken.g = Matrix::zeros(ctx, t.c.dim(), t.b.dim());
        let seq = Periodic::new(vec![t.clone(), t.clone(), broken], vec![t]).unwrap();
        assert!(matches!(
            patch_exactness_check(&s, &seq, false, &Selector::LeastIndex, 2),
            Err(Error::InputNotExact { index: 2, .. })
        ));
    }

    #[test]
    fn bad_maps_are_rejected() {
        let s = base(4);
        let a = s.cyclic_sum(&[2]).unwrap();
        let b = s.cyclic_sum(&[1]).unwrap();
        // S/(y) -> S/(y^2), 1 -> 1 is not well defined
        assert!(b.map_to(&a, &[vec![vec![1]]]).is_err());
        assert!(a.map_to(&b, &[vec![vec![1]]]).is_ok());
    }
}
