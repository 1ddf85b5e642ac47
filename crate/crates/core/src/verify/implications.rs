use serde::Serialize;

use super::{
    check_ef1, check_efx, check_fisher_eq, check_fpo, check_pef1, check_po_brute, check_tefx, fpo_lp_size,
    po_candidates, VerifyLimits,
};
use crate::error::Result;
use crate::model::{Instance, PriceVector, SurplusAllocation};

/// One `antecedent => consequent` instance evaluated on concrete data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Implication {
    pub name: &'static str,
    pub antecedent: bool,
    pub consequent: bool,
}

impl Implication {
    pub fn holds(&self) -> bool {
        !self.antecedent || self.consequent
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImplicationReport {
    pub implications: Vec<Implication>,
}

impl ImplicationReport {
    pub fn violations(&self) -> Vec<&Implication> {
        self.implications.iter().filter(|i| !i.holds()).collect()
    }

    pub fn pass(&self) -> bool {
        self.implications.iter().all(Implication::holds)
    }
}

/// Evaluates the implication lattice
///
/// * pEF1 and FisherEq => EF1 (needs prices)
/// * EFX => tEFX
/// * FisherEq => fPO (needs prices and an LP within limits)
/// * fPO => PO (needs brute force and LP within limits)
///
/// Implications whose sides cannot be evaluated under `limits` are omitted.
pub fn implication_suite(
    inst: &Instance,
    alloc: &SurplusAllocation,
    prices: Option<&PriceVector>,
    limits: VerifyLimits,
) -> Result<ImplicationReport> {
    let mut report = ImplicationReport::default();
    let lp_ok = fpo_lp_size(inst) <= limits.lp_variables;
    let brute_ok = po_candidates(inst, alloc) <= limits.po_candidates;
    let fpo = if lp_ok {
        Some(check_fpo(inst, alloc, limits)?.holds)
    } else {
        None
    };
    let ef1 = check_ef1(inst, alloc)?.holds;

    if let Some(p) = prices {
        let pef1 = check_pef1(p, alloc)?.holds;
        let eq = check_fisher_eq(inst, alloc, p)?.holds;
        report.implications.push(Implication {
            name: "pEF1 and FisherEq => EF1",
            antecedent: pef1 && eq,
            consequent: ef1,
        });
        if let Some(fpo) = fpo {
            report.implications.push(Implication {
                name: "FisherEq => fPO",
                antecedent: eq,
                consequent: fpo,
            });
        }
    }
    report.implications.push(Implication {
        name: "EFX => tEFX",
        antecedent: check_efx(inst, alloc)?.holds,
        consequent: check_tefx(inst, alloc)?.holds,
    });
    if let (Some(fpo), true) = (fpo, brute_ok) {
        report.implications.push(Implication {
            name: "fPO => PO",
            antecedent: fpo,
            consequent: check_po_brute(inst, alloc, limits)?.holds,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::rational::int;

    #[test]
    fn diagonal_market_satisfies_everything() {
        let inst = Instance::from_ints(&[vec![1, 2], vec![2, 1]]).unwrap();
        let sets: Vec<BTreeSet<usize>> = vec![[0].into(), [1].into()];
        let a = SurplusAllocation::from_chore_sets(&sets, 2).unwrap();
        let p = PriceVector::new(vec![int(1), int(1)]).unwrap();
        let r = implication_suite(&inst, &a, Some(&p), VerifyLimits::default()).unwrap();
        assert_eq!(r.implications.len(), 4);
        assert!(r.implications.iter().all(|i| i.antecedent && i.consequent));
    }

    #[test]
    fn false_antecedents_hold_vacuously() {
        let inst = Instance::from_ints(&[vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        let sets: Vec<BTreeSet<usize>> = vec![[0, 1, 2].into(), BTreeSet::new()];
        let a = SurplusAllocation::from_chore_sets(&sets, 3).unwrap();
        let p = PriceVector::new(vec![int(1), int(1), int(1)]).unwrap();
        let r = implication_suite(&inst, &a, Some(&p), VerifyLimits::default()).unwrap();
        assert!(r.pass());
        assert!(!r.implications[0].antecedent);
    }
}
