//! Acceptance suite: one PASS/FAIL line per criterion. Criterion 12 is an
//! observation and never affects the exit status.

use std::time::Instant;

use modpforms::commalg::{hilbert_limit_compare, RingPresentation, TruncatedLocalRing};
use modpforms::fieldseries::FieldContext;
use modpforms::hecke::{apply_tn, nonordinary_from_ordinary, ord_no_decompose, spread_vp};
use modpforms::heckealg::{
    algebra_precision, cokernel_report, default_prime_bound, duality_pairing, generate_algebra, periodicity_check,
    serre_quotient, socle_dim, theta_kernel, twist_check, CokernelKind,
};
use modpforms::level1::{self, filtration, hasse_shift, Filtration, Form, SpaceKind};
use modpforms::serreweight::{enumerate_descriptors, report, DescriptorCase, ResidualDescriptor};
use modpforms::ultrapatch::{
    is_free_of_rank, patch, patch_exactness_check, BaseKind, BaseRing, ExactTriple, ModuleSequence, Periodic,
    Selector,
};
use modpforms::hecke::HeckeOperatorLabel as HeckeLabel;

type Outcome = Result<String, String>;

fn ctx(p: u64) -> FieldContext {
    FieldContext::new(p).unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// `tau(n)` for `n < len` from the product `q prod (1 - q^n)^24`, in i128.
fn tau_oracle(len: usize) -> Vec<i128> {
    let mut prod = vec![0i128; len];
    prod[0] = 1;
    for n in 1..len {
        for _ in 0..24 {
            for i in (n..len).rev() {
                prod[i] -= prod[i - n];
            }
        }
    }
    let mut tau = vec![0i128; len];
    tau[1..len].copy_from_slice(&prod[..len - 1]);
    tau
}

fn sigma_oracle(n: u64, e: u32) -> u128 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as u128).pow(e)).sum()
}

fn residue(x: i128, p: u64) -> u64 {
    x.rem_euclid(p as i128) as u64
}

fn c1_katz_kernel() -> Outcome {
    let mut cases = 0;
    for p in [5u64, 7] {
        for k in (4..=40).step_by(2) {
            let (ker, w) = theta_kernel(ctx(p), k, 0).map_err(err)?;
            ensure!(ker.dim() == w.dim(), "p={p} k={k}: dim ker {} vs dim W {}", ker.dim(), w.dim());
            ensure!(ker.contains_subspace(&w) && w.contains_subspace(&ker), "p={p} k={k}: containment fails");
            cases += 1;
        }
    }
    Ok(format!("{cases} weights"))
}

fn c2_filtration() -> Outcome {
    let mut forms = 0;
    for p in [5u64, 7] {
        let c = ctx(p);
        for k in (12..=28).step_by(2) {
            let vp_weight = p as u32 * k;
            let prec = level1::sturm(vp_weight).div_ceil(p as usize).max(level1::sturm(k + 3 * (p as u32 - 1)));
            let space = level1::basis(c, k, SpaceKind::Cusp, prec).map_err(err)?;
            for f in space.forms() {
                let w = filtration(&f).map_err(err)?;
                let wv = filtration(&spread_vp(&f).map_err(err)?).map_err(err)?;
                let expected = match w {
                    Filtration::Zero => Filtration::Zero,
                    Filtration::Weight(x) => Filtration::Weight(p as u32 * x),
                };
                ensure!(wv == expected, "p={p} k={k}: w(V_p f) = {wv:?}, p w(f) = {expected:?}");
                for m in 1..=3 {
                    let wa = filtration(&hasse_shift(&f, m).map_err(err)?).map_err(err)?;
                    ensure!(wa == w, "p={p} k={k} m={m}: w(A^m f) = {wa:?} vs {w:?}");
                }
                forms += 1;
            }
        }
    }
    Ok(format!("{forms} basis forms"))
}

fn c3_duality() -> Outcome {
    let mut cases = 0;
    for p in [5u64, 7] {
        for k in (12..=60).step_by(2) {
            let b = default_prime_bound(k);
            let s = level1::basis(ctx(p), k, SpaceKind::Cusp, algebra_precision(p, k, b)).map_err(err)?;
            let d = duality_pairing(&generate_algebra(&s, b, true).map_err(err)?, &s).map_err(err)?;
            ensure!(d.rank == s.dim() && d.perfect, "p={p} k={k}: rank {} of dim {}", d.rank, s.dim());
            cases += 1;
        }
    }
    Ok(format!("{cases} spaces"))
}

fn c4_cokernel() -> Outcome {
    let mut none_cases = 0;
    for k in (4..=100).step_by(2) {
        let r = cokernel_report(ctx(5), k, CokernelKind::Cusp).map_err(err)?;
        ensure!(
            r.verdict,
            "k={k}: dim T - dim T^p = {}, dim(S_k ∩ Im V_p) = {}, dim S_j(k) = {} (j = {:?})",
            r.dim_cokernel,
            r.dim_vp_intersection,
            r.dim_mjk,
            r.j_of_k
        );
        if r.j_of_k.is_none() {
            ensure!(r.dim_cokernel == 0, "k={k}: j(k) = NONE but cokernel has dim {}", r.dim_cokernel);
            none_cases += 1;
        }
        if k == 60 {
            ensure!(r.dim_cokernel == 1, "k=60 spot value {} != 1", r.dim_cokernel);
        }
    }
    Ok(format!("k = 4..100 agree ({none_cases} with j(k) = NONE), k=60 gives 1"))
}

fn c5_nonordinary() -> Outcome {
    let p = 11;
    let tau = tau_oracle(12);
    ensure!(residue(tau[11], p) == 1, "oracle tau(11) mod 11 = {}", residue(tau[11], p));
    let prec = p as usize * level1::sturm(132);
    let delta = level1::basis(ctx(p), 12, SpaceKind::Cusp, prec).map_err(err)?.forms().remove(0);
    let g = nonordinary_from_ordinary(&delta, residue(tau[11], p), &[2, 3, 5]).map_err(err)?;
    ensure!(g.form.weight == 132, "weight {}", g.form.weight);
    for (l, lambda) in &g.eigenvalues {
        ensure!(*lambda == residue(tau[*l as usize], p), "T_{l} eigenvalue {lambda}");
    }
    ensure!(g.eigenvalues.len() == 3, "only {} primes checked", g.eigenvalues.len());
    Ok("g in M_132(F_11), U_11 g = 0, T_l g = tau(l) g for l = 2, 3, 5".into())
}

fn c6_census() -> Outcome {
    let tau = tau_oracle(12);
    for p in [5u64, 7] {
        ensure!(residue(tau[p as usize], p) == 0, "oracle tau({p}) is a unit mod {p}");
        let s = level1::basis(ctx(p), 12, SpaceKind::Cusp, p as usize * 2).map_err(err)?;
        let d = ord_no_decompose(&s).map_err(err)?;
        ensure!(d.up_matrix.is_zero(), "U_{p} on S_12(F_{p}) is nonzero");
    }
    let s = level1::basis(ctx(11), 12, SpaceKind::Cusp, 22).map_err(err)?;
    let d = ord_no_decompose(&s).map_err(err)?;
    ensure!(d.up_matrix.rank() == 1 && d.ordinary.dim() == 1, "U_11 on S_12(F_11) not invertible");
    Ok("U_5, U_7 zero; U_11 invertible".into())
}

fn c7_eisenstein() -> Outcome {
    let out = 6;
    let mut checks = 0;
    for p in [5u64, 7, 11] {
        let c = ctx(p);
        for (w, e) in [(4u32, 3u32), (6, 5)] {
            let e_k = Form::new(w, level1::eisenstein(w, 20 * out).map_err(err)?.reduce_mod_p(c).map_err(err)?);
            for n in (1..=20u64).filter(|n| n % p != 0) {
                let t = apply_tn(&e_k, n).map_err(err)?;
                let lambda = (sigma_oracle(n, e) % p as u128) as u64;
                let expect = e_k.series.truncate(t.prec()).map_err(err)?.scale(&lambda.into());
                ensure!(t.series == expect, "p={p}: T_{n} E_{w} != sigma_{e}({n}) E_{w}");
                checks += 1;
            }
        }
    }
    ensure!(sigma_oracle(4, 3) == 73, "T_4 E_4 eigenvalue {}", sigma_oracle(4, 3));
    Ok(format!("{checks} eigen-identities, T_4 E_4 eigenvalue 73"))
}

fn c8_serre_weights() -> Outcome {
    for (d, k) in [
        (ResidualDescriptor::irreducible(5, 0, 1), 2),
        (ResidualDescriptor::irreducible(7, 0, 1), 2),
        (ResidualDescriptor::wild(5, 0, 1, true), 6),
    ] {
        let r = report(&d).map_err(err)?;
        ensure!(r.k == k, "{d:?}: k = {} expected {k}", r.k);
    }
    let mut total = 0;
    for p in [5u64, 7] {
        let r = report(&ResidualDescriptor::unramified(p)).map_err(err)?;
        ensure!(r.k_no == p * p, "unramified k_no = {}", r.k_no);
        for d in enumerate_descriptors(p) {
            let r = report(&d).map_err(err)?;
            let (a, b) = match d.case {
                DescriptorCase::Wild => {
                    let (x, y) = (d.alpha.unwrap(), d.beta.unwrap());
                    (x.min(y), x.max(y))
                }
                _ => (d.a.unwrap(), d.b.unwrap()),
            };
            let expected_k = if d.tres_ramifiee { p + p * a + b } else { 1 + p * a + b };
            ensure!(r.k == expected_k, "{d:?}: k = {}", r.k);
            ensure!((1..p * p).contains(&r.k), "{d:?}: k = {} out of range", r.k);
            let shape_one = match d.case {
                DescriptorCase::Wild => d.alpha == Some(0),
                DescriptorCase::TameReducible => d.a == Some(0),
                _ => false,
            };
            let unramified = d.case == DescriptorCase::TameReducible && d.a == Some(0) && d.b == Some(0);
            let hits = [unramified, shape_one && !unramified, !shape_one].iter().filter(|&&h| h).count();
            ensure!(hits == 1, "{d:?}: k_no cases overlap");
            let expected_no = if unramified {
                p * p
            } else if shape_one {
                p * r.k
            } else {
                r.k
            };
            ensure!(r.k_no == expected_no, "{d:?}: k_no = {}", r.k_no);
            ensure!((r.k_no + p - 1 - r.k % (p - 1)) % (p - 1) == 0 || unramified, "{d:?}: congruence");
            total += 1;
        }
    }
    Ok(format!("{total} descriptors enumerated"))
}

fn c9_serre_forms() -> Outcome {
    let c = ctx(5);
    for k in 12..=20u32 {
        let per = periodicity_check(c, k, HeckeLabel::T(2)).map_err(err)?;
        ensure!(per.dims.0 == per.dims.1, "k={k}: dim S(k) = {} vs dim S(k+24) = {}", per.dims.0, per.dims.1);
        ensure!(per.verdict, "k={k}: T_2 charpolys {:?} vs {:?}", per.charpolys.0, per.charpolys.1);
        let tw = twist_check(c, k, 2).map_err(err)?;
        ensure!(tw.verdict, "k={k}: twist expected {:?}, got {:?}", tw.expected, tw.charpolys.1);
    }
    Ok("k = 12..20 periodic and twisted".into())
}

fn ring(vars: &[&str], rels: &[String], d: u32) -> Result<TruncatedLocalRing, String> {
    let pres = RingPresentation { p: 5, vars: vars.iter().map(|s| s.to_string()).collect(), relations: rels.to_vec() };
    TruncatedLocalRing::from_presentation(&pres, d).map_err(err)
}

/// Monomials of degree `n` in `vars` variables not divisible by the product of the last two.
fn monomial_oracle(vars: usize, n: u32) -> usize {
    fn rec(left: usize, n: u32, acc: &mut Vec<u32>, out: &mut usize) {
        if left == 1 {
            acc.push(n);
            let l = acc.len();
            if !(acc[l - 1] > 0 && acc[l - 2] > 0) {
                *out += 1;
            }
            acc.pop();
            return;
        }
        for e in 0..=n {
            acc.push(e);
            rec(left - 1, n - e, acc, out);
            acc.pop();
        }
    }
    let mut out = 0;
    rec(vars, n, &mut Vec::new(), &mut out);
    out
}

fn c10_hilbert() -> Outcome {
    let free = ring(&["x1", "x2", "x3", "a"], &[], 10)?.hilbert_function().coeffs;
    for (n, h) in free.iter().enumerate() {
        let c = (n + 1) * (n + 2) * (n + 3) / 6;
        ensure!(*h == c, "free H({n}) = {h} vs C(n+3,3) = {c}");
    }
    let h = ring(&["x1", "x2", "x3", "y", "a"], &["y*a".into()], 5)?.hilbert_function().coeffs;
    let oracle: Vec<usize> = (0..=5).map(|n| monomial_oracle(5, n)).collect();
    ensure!(oracle == vec![1, 5, 14, 30, 55, 91], "monomial oracle {oracle:?}");
    ensure!(h == oracle, "H = {h:?}");
    let target = ring(&["x", "y"], &["x*y".into()], 6)?;
    let seq = (1..=6)
        .map(|n| ring(&["x", "y"], &["x*y".into(), format!("x^{n}")], 6))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = hilbert_limit_compare(&seq, &target, 4).map_err(err)?;
    for c in &rep {
        ensure!(c.stabilizes_at == Some(c.i), "coefficient {} stabilizes at {:?}", c.i, c.stabilizes_at);
    }
    Ok("binomial, quadric and stabilization pattern reproduced".into())
}

fn c11_ultrapatch() -> Outcome {
    let s = BaseRing::new(ctx(5), BaseKind::PowerSeries { trunc: 6 }, Vec::new()).map_err(err)?;
    let sel = Selector::LeastIndex;
    let m = s.cyclic_sum(&[6, 4, 2, 1]).map_err(err)?.module;
    let constant = ModuleSequence::constant(s.clone(), m.clone()).map_err(err)?;
    for depth in 1..=6 {
        let p = patch(&constant, &sel, depth).map_err(err)?;
        let direct = m.tensor_quotient(s.chain()[depth - 1]).0;
        ensure!(p.module.signature() == direct.signature(), "constant patching differs at depth {depth}");
    }
    for r in 1..=3 {
        let free = ModuleSequence::family(s.clone(), &s.free(r).map_err(err)?.module).map_err(err)?;
        for depth in 1..=6 {
            let p = patch(&free, &sel, depth).map_err(err)?;
            ensure!(is_free_of_rank(&p.module, r, depth), "rank {r} depth {depth}: {:?}", p.module.signature());
        }
    }
    let a = s.cyclic_sum(&[1]).map_err(err)?;
    let b = s.cyclic_sum(&[1, 2]).map_err(err)?;
    let c = s.cyclic_sum(&[2]).map_err(err)?;
    let triple = ExactTriple {
        f: a.map_to(&b, &[vec![vec![1], vec![]]]).map_err(err)?,
        g: b.map_to(&c, &[vec![vec![]], vec![vec![1]]]).map_err(err)?,
        a: a.module,
        b: b.module,
        c: c.module,
    };
    let rep = patch_exactness_check(&s, &Periodic::new(vec![], vec![triple]).map_err(err)?, true, &sel, 6)
        .map_err(err)?;
    ensure!(rep.verdict, "split sequence not split after patching: {:?}", rep.level_verdicts);
    let toy = ModuleSequence::family(s.clone(), &m).map_err(err)?;
    ensure!(toy.annihilation_violations().is_empty(), "toy sequence not killed by I_n");
    let p = patch(&toy, &sel, 5).map_err(err)?;
    ensure!(p.module.signature() == vec![5, 4, 2, 1], "depth 5 gives {:?}", p.module.signature());
    Ok("constant, free, split-exact and I_n toy sequences".into())
}

fn c12_socle() -> Outcome {
    let tau = tau_oracle(4);
    let system = [(2, residue(tau[2], 5)), (3, residue(tau[3], 5))];
    let mut seen = Vec::new();
    for k in (4..=40).step_by(2) {
        let s = serre_quotient(ctx(5), k, level1::sturm(k)).map_err(err)?;
        if s.dim == 0 {
            continue;
        }
        let d = socle_dim(ctx(5), k, &system).map_err(err)?;
        seen.push(format!("{k}:{d}"));
        ensure!(d <= 1, "socle dimension {d} at k={k} (observation: {})", seen.join(" "));
    }
    Ok(format!("socle dims {}", seen.join(" ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 12] = [
        ("1 Katz kernel identity", c1_katz_kernel, true),
        ("2 filtration law", c2_filtration, true),
        ("3 duality perfectness", c3_duality, true),
        ("4 cokernel rank law", c4_cokernel, true),
        ("5 non-ordinary construction", c5_nonordinary, true),
        ("6 ordinarity census", c6_census, true),
        ("7 Eisenstein/recursion consistency", c7_eisenstein, true),
        ("8 Serre-weight tables", c8_serre_weights, true),
        ("9 Serre-form periodicity and twist", c9_serre_forms, true),
        ("10 Hilbert functions", c10_hilbert, true),
        ("11 ultrapatching", c11_ultrapatch, true),
        ("12 socle observation (non-gating)", c12_socle, false),
    ];
    let mut failed = 0;
    for (name, run, gating) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{secs:.2}s]: {detail}"),
            Err(why) if gating => {
                failed += 1;
                println!("FAIL criterion {name} [{secs:.2}s]: {why}");
            }
            Err(why) => println!("NOTE criterion {name} [{secs:.2}s]: {why}"),
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
    println!("all gating criteria passed");
}
