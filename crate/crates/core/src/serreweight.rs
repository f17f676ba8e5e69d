//! Serre weights `k(r)` and non-ordinary Serre weights `k(r)^no` computed from
//! symbolic descriptors of a local mod-p representation.
//!
//! The très/peu ramifiée distinction is an input flag. The cyclotomic-ratio
//! flag and the inertial shape are derived from the exponents; if a
//! descriptor supplies them they must agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldseries::{is_prime, FieldContext};
use crate::hecke::{operator_matrix, ord_no_decompose, HeckeOperatorLabel};
use crate::level1::{self, sturm, SpaceKind};
use crate::linalg::Matrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescriptorCase {
    Irreducible,
    TameReducible,
    Wild,
    /// Shorthand for tame-reducible with `a = b = 0`.
    Unramified,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InertialShape {
    Generic,
    EpsBExtensionOf1Ramified,
    Unramified,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidualDescriptor {
    pub p: u64,
    pub case: DescriptorCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_is_cyclotomic: Option<bool>,
    #[serde(default)]
    pub tres_ramifiee: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unramified_shape: Option<InertialShape>,
}

impl ResidualDescriptor {
    pub fn irreducible(p: u64, a: u64, b: u64) -> Self {
        Self::blank(p, DescriptorCase::Irreducible, Some(a), Some(b), None, None, false)
    }

    pub fn tame(p: u64, a: u64, b: u64) -> Self {
        Self::blank(p, DescriptorCase::TameReducible, Some(a), Some(b), None, None, false)
    }

    pub fn wild(p: u64, alpha: u64, beta: u64, tres_ramifiee: bool) -> Self {
        Self::blank(p, DescriptorCase::Wild, None, None, Some(alpha), Some(beta), tres_ramifiee)
    }

    pub fn unramified(p: u64) -> Self {
        Self::blank(p, DescriptorCase::Unramified, None, None, None, None, false)
    }

    fn blank(
        p: u64,
        case: DescriptorCase,
        a: Option<u64>,
        b: Option<u64>,
        alpha: Option<u64>,
        beta: Option<u64>,
        tres_ramifiee: bool,
    ) -> Self {
        ResidualDescriptor {
            p,
            case,
            a,
            b,
            alpha,
            beta,
            ratio_is_cyclotomic: None,
            tres_ramifiee,
            unramified_shape: None,
        }
    }

    /// Checks the invariants and returns the normalised data.
    pub fn validate(&self) -> Result<Normalized> {
        let p = self.p;
        let bad = |m: String| Err(Error::InvalidDescriptor(m));
        if p < 5 || !is_prime(p) {
            return bad(format!("p = {p} must be a prime >= 5"));
        }
        let need = |v: Option<u64>, name: &str| {
            v.ok_or_else(|| Error::InvalidDescriptor(format!("case {:?} needs '{name}'", self.case)))
        };
        let forbid = |v: Option<u64>, name: &str| -> Result<()> {
            if v.is_some() {
                return Err(Error::InvalidDescriptor(format!("'{name}' is not used by case {:?}", self.case)));
            }
            Ok(())
        };
        let (case, a, b, cyclotomic, shape) = match self.case {
            DescriptorCase::Irreducible => {
                forbid(self.alpha, "alpha")?;
                forbid(self.beta, "beta")?;
                let (a, b) = (need(self.a, "a")?, need(self.b, "b")?);
                if !(a < b && b < p) {
                    return bad(format!("irreducible needs 0 <= a < b <= p-1, got ({a}, {b})"));
                }
                (DescriptorCase::Irreducible, a, b, false, InertialShape::Generic)
            }
            DescriptorCase::TameReducible | DescriptorCase::Unramified => {
                forbid(self.alpha, "alpha")?;
                forbid(self.beta, "beta")?;
                let (a, b) = if self.case == DescriptorCase::Unramified {
                    (self.a.unwrap_or(0), self.b.unwrap_or(0))
                } else {
                    (need(self.a, "a")?, need(self.b, "b")?)
                };
                if !(a <= b && b + 2 <= p) {
                    return bad(format!("tame-reducible needs 0 <= a <= b <= p-2, got ({a}, {b})"));
                }
                if self.case == DescriptorCase::Unramified && (a, b) != (0, 0) {
                    return bad("unramified forces a = b = 0".into());
                }
                let shape = match (a, b) {
                    (0, 0) => InertialShape::Unramified,
                    (0, _) => InertialShape::EpsBExtensionOf1Ramified,
                    _ => InertialShape::Generic,
                };
                (DescriptorCase::TameReducible, a, b, false, shape)
            }
            DescriptorCase::Wild => {
                forbid(self.a, "a")?;
                forbid(self.b, "b")?;
                let (alpha, beta) = (need(self.alpha, "alpha")?, need(self.beta, "beta")?);
                if !(alpha + 2 <= p && (1..p).contains(&beta)) {
                    return bad(format!(
                        "wild needs 0 <= alpha <= p-2 and 1 <= beta <= p-1, got ({alpha}, {beta})"
                    ));
                }
                let cyclotomic = (beta as i64 - alpha as i64 - 1).rem_euclid(p as i64 - 1) == 0;
                let shape = if alpha == 0 {
                    InertialShape::EpsBExtensionOf1Ramified
                } else {
                    InertialShape::Generic
                };
                (DescriptorCase::Wild, alpha.min(beta), alpha.max(beta), cyclotomic, shape)
            }
        };
        if let Some(flag) = self.ratio_is_cyclotomic {
            if flag != cyclotomic {
                return bad(format!("ratio_is_cyclotomic = {flag} contradicts the exponents"));
            }
        }
        if self.tres_ramifiee && !(case == DescriptorCase::Wild && cyclotomic) {
            return bad("tres_ramifiee needs a wild extension whose character ratio is cyclotomic".into());
        }
        if let Some(given) = self.unramified_shape {
            if given != shape {
                return bad(format!("unramified_shape {given:?} contradicts the exponents ({shape:?})"));
            }
        }
        Ok(Normalized { p, case, a, b, tres: self.tres_ramifiee, shape })
    }
}

/// Descriptor data after validation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub p: u64,
    pub case: DescriptorCase,
    pub a: u64,
    pub b: u64,
    pub tres: bool,
    pub shape: InertialShape,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SerreWeightReport {
    pub k: u64,
    pub k_no: u64,
    pub case_trace: String,
}

pub fn serre_weight(d: &ResidualDescriptor) -> Result<u64> {
    Ok(report(d)?.k)
}

pub fn nonordinary_serre_weight(d: &ResidualDescriptor) -> Result<u64> {
    Ok(report(d)?.k_no)
}

pub fn report(d: &ResidualDescriptor) -> Result<SerreWeightReport> {
    let n = d.validate()?;
    let p = n.p;
    let base = 1 + p * n.a + n.b;
    let (k, trace_k) = if n.tres {
        (base + p - 1, format!("wild tres ramifiee: p + p*{} + {}", n.a, n.b))
    } else {
        let label = match n.case {
            DescriptorCase::Irreducible => "irreducible",
            DescriptorCase::Wild => "wild",
            _ => "tame reducible",
        };
        (base, format!("{label}: 1 + p*{} + {}", n.a, n.b))
    };
    let (k_no, trace_no) = match n.shape {
        InertialShape::Unramified => (p * p, "unramified: k_no = p^2"),
        InertialShape::EpsBExtensionOf1Ramified => (p * k, "(eps^b *; 0 1) and ramified: k_no = p*k"),
        InertialShape::Generic => (k, "generic shape: k_no = k"),
    };
    Ok(SerreWeightReport { k, k_no, case_trace: format!("{trace_k}; {trace_no}") })
}

/// Every valid descriptor for `p`, in a fixed order.
pub fn enumerate_descriptors(p: u64) -> Vec<ResidualDescriptor> {
    let mut out = Vec::new();
    for b in 0..p {
        for a in 0..b {
            out.push(ResidualDescriptor::irreducible(p, a, b));
        }
    }
    for b in 0..p - 1 {
        for a in 0..=b {
            out.push(ResidualDescriptor::tame(p, a, b));
        }
    }
    for alpha in 0..p - 1 {
        for beta in 1..p {
            out.push(ResidualDescriptor::wild(p, alpha, beta, false));
            if beta == alpha + 1 {
                out.push(ResidualDescriptor::wild(p, alpha, beta, true));
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub p: u64,
    pub k_max: u32,
    pub eigensystem: Vec<(u64, u64)>,
    /// Least weight with a matching non-ordinary eigenvector.
    pub weight: Option<u32>,
    /// `(k, dim)` for each weight whose non-ordinary cusp part is nonzero.
    pub nonzero: Vec<(u32, usize)>,
    /// An empty eigensystem matches any nonzero non-ordinary space.
    pub degenerate_input: bool,
}

/// Dimension of the simultaneous eigenspace of the eigensystem inside `S_k^no`.
pub fn nonordinary_eigenspace_dim(ctx: FieldContext, k: u32, eigensystem: &[(u64, u64)]) -> Result<usize> {
    if k < 12 || k % 2 == 1 {
        return Ok(0);
    }
    let p = ctx.p();
    for &(l, _) in eigensystem {
        if l == p || !is_prime(l) {
            return Err(Error::BadPrime(l));
        }
    }
    let max_l = eigensystem.iter().map(|e| e.0).max().unwrap_or(1).max(p);
    let space = level1::basis(ctx, k, SpaceKind::Cusp, max_l as usize * sturm(k))?;
    let no = ord_no_decompose(&space)?.nonordinary;
    if no.dim() == 0 {
        return Ok(0);
    }
    let mut rows = Vec::new();
    for &(l, lambda) in eigensystem {
        rows.extend(operator_matrix(&no, HeckeOperatorLabel::T(l))?.shift(lambda % p).to_rows());
    }
    if rows.is_empty() {
        return Ok(no.dim());
    }
    Ok(no.dim() - Matrix::from_rows(ctx, no.dim(), &rows).rank())
}

pub fn min_nonordinary_weight_scan(ctx: FieldContext, eigensystem: &[(u64, u64)], k_max: u32) -> Result<ScanReport> {
    let mut nonzero = Vec::new();
    for k in 2..=k_max {
        let d = nonordinary_eigenspace_dim(ctx, k, eigensystem)?;
        if d > 0 {
            nonzero.push((k, d));
        }
    }
    Ok(scan_report(ctx, eigensystem, k_max, nonzero))
}

/// Assembles a scan report from per-weight dimensions (in any order).
pub fn scan_report(
    ctx: FieldContext,
    eigensystem: &[(u64, u64)],
    k_max: u32,
    mut nonzero: Vec<(u32, usize)>,
) -> ScanReport {
    nonzero.retain(|e| e.1 > 0);
    nonzero.sort_unstable();
    ScanReport {
        p: ctx.p(),
        k_max,
        eigensystem: eigensystem.to_vec(),
        weight: nonzero.first().map(|e| e.0),
        nonzero,
        degenerate_input: eigensystem.is_empty(),
    }
}
