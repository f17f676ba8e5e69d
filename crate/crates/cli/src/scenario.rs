//! JSON scenarios for the `ultrapatch` command.

use modpforms::fieldseries::FieldContext;
use modpforms::ultrapatch::{
    is_free_of_rank, patch, patch_exactness_check, BaseKind, BaseRing, CompatibilityCertificate, ExactTriple,
    ExactnessReport, LevelSummary, ModuleSequence, Periodic, PresentedModule, Selector,
};
use modpforms::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    Cyclic { cyclic: Vec<usize> },
    Free { free: usize },
    Presented { gens: usize, relations: Vec<Vec<Vec<u64>>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Family { family: EntrySpec },
    Periodic {
        #[serde(default)]
        prefix: Vec<EntrySpec>,
        period: Vec<EntrySpec>,
        generator_bound: Option<usize>,
    },
}

#[derive(Clone, Debug, Deserialize)]
pub struct TripleSpec {
    pub a: EntrySpec,
    pub b: EntrySpec,
    pub c: EntrySpec,
    pub f: Vec<Vec<Vec<u64>>>,
    pub g: Vec<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExactSpec {
    #[serde(default)]
    pub split: bool,
    #[serde(default)]
    pub prefix: Vec<TripleSpec>,
    pub period: Vec<TripleSpec>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Scenario {
    pub p: u64,
    pub base: BaseKind,
    #[serde(default)]
    pub chain: Vec<usize>,
    #[serde(default)]
    pub selector: Selector,
    pub sequence: Option<SequenceSpec>,
    pub free_rank: Option<usize>,
    pub base_change: Option<usize>,
    pub exact: Option<ExactSpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseChangeReport {
    pub b: usize,
    pub patched_then_reduced: Vec<usize>,
    pub reduced_then_patched: Vec<usize>,
    pub verdict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchReport {
    pub witness: usize,
    pub levels: Vec<LevelSummary>,
    pub signature: Vec<usize>,
    pub certificate: CompatibilityCertificate,
    pub annihilation_violations: Vec<usize>,
    pub free_of_rank: Option<bool>,
    pub base_change: Option<BaseChangeReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub p: u64,
    pub selector: Selector,
    pub depth: usize,
    pub chain: Vec<usize>,
    pub patch: Option<PatchReport>,
    pub exactness: Option<ExactnessReport>,
    pub verdict: bool,
}

fn build(base: &BaseRing, e: &EntrySpec) -> Result<PresentedModule> {
    match e {
        EntrySpec::Cyclic { cyclic } => base.cyclic_sum(cyclic),
        EntrySpec::Free { free } => base.free(*free),
        EntrySpec::Presented { gens, relations } => base.present(*gens, relations),
    }
}

fn sequence(base: &BaseRing, spec: &SequenceSpec) -> Result<ModuleSequence> {
    match spec {
        SequenceSpec::Family { family } => ModuleSequence::family(base.clone(), &build(base, family)?.module),
        SequenceSpec::Periodic { prefix, period, generator_bound } => {
            let prefix = prefix.iter().map(|e| Ok(build(base, e)?.module)).collect::<Result<Vec<_>>>()?;
            let period = period.iter().map(|e| Ok(build(base, e)?.module)).collect::<Result<Vec<_>>>()?;
            let bound = generator_bound.unwrap_or_else(|| {
                prefix.iter().chain(&period).map(|m| m.generator_count()).max().unwrap_or(0)
            });
            ModuleSequence::new(base.clone(), bound, Periodic::new(prefix, period)?)
        }
    }
}

fn triple(base: &BaseRing, t: &TripleSpec) -> Result<ExactTriple> {
    let (a, b, c) = (build(base, &t.a)?, build(base, &t.b)?, build(base, &t.c)?);
    Ok(ExactTriple { f: a.map_to(&b, &t.f)?, g: b.map_to(&c, &t.g)?, a: a.module, b: b.module, c: c.module })
}

pub fn run(s: &Scenario, depth: usize) -> Result<ScenarioReport> {
    let base = BaseRing::new(FieldContext::new(s.p)?, s.base, s.chain.clone())?;
    let mut verdict = true;
    let patch_report = match &s.sequence {
        None => None,
        Some(spec) => {
            let seq = sequence(&base, spec)?;
            let res = patch(&seq, &s.selector, depth)?;
            let signature = res.module.signature();
            let d = base.chain()[depth - 1];
            let free_of_rank = s.free_rank.map(|r| is_free_of_rank(&res.module, r, d));
            let base_change = match s.base_change {
                None => None,
                Some(b) => {
                    let lhs = res.module.tensor_quotient(b).0.signature();
                    let rhs = patch(&seq.base_change(b)?, &s.selector, depth)?.module.signature();
                    Some(BaseChangeReport { b, verdict: lhs == rhs, patched_then_reduced: lhs, reduced_then_patched: rhs })
                }
            };
            verdict &= free_of_rank.unwrap_or(true) && base_change.as_ref().is_none_or(|b| b.verdict);
            Some(PatchReport {
                witness: res.witness,
                levels: res.levels,
                signature,
                certificate: res.certificate,
                annihilation_violations: seq.annihilation_violations(),
                free_of_rank,
                base_change,
            })
        }
    };
    let exactness = match &s.exact {
        None => None,
        Some(spec) => {
            let prefix = spec.prefix.iter().map(|t| triple(&base, t)).collect::<Result<Vec<_>>>()?;
            let period = spec.period.iter().map(|t| triple(&base, t)).collect::<Result<Vec<_>>>()?;
            let rep = patch_exactness_check(&base, &Periodic::new(prefix, period)?, spec.split, &s.selector, depth)?;
            verdict &= rep.verdict;
            Some(rep)
        }
    };
    if patch_report.is_none() && exactness.is_none() {
        return Err(Error::Invalid("scenario needs a 'sequence' or an 'exact' section".into()));
    }
    Ok(ScenarioReport {
        p: s.p,
        selector: s.selector,
        depth,
        chain: base.chain().to_vec(),
        patch: patch_report,
        exactness,
        verdict,
    })
}
