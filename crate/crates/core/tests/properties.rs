use std::collections::BTreeSet;

use chorefair::equilibrium::{
    approx_ceei, default_epsilon, exact_ceei, make_acyclic, make_acyclic_traced, verify_fisher_equilibrium,
    SearchLimits,
};
use chorefair::rational::{int, one, rat, sum};
use chorefair::surplus::{fair_and_efficient, phase1, CeeiSolver, RoundingState, SolveOptions, TraceEvent};
use chorefair::three_agent::{perturb_nondegenerate, solve_three};
use chorefair::verify::{
    check_ef1, check_efx, check_fisher_eq, check_fpo, check_pef1, check_po_brute, check_proportional, check_tefx,
    witness_reproduces, VerifyLimits,
};
use chorefair::{bundle_disutility, bundle_payment, mpb, Bundle, ChoreCopy, Instance, PriceVector, SurplusAllocation};
use proptest::prelude::*;

fn instance(
    agents: std::ops::RangeInclusive<usize>,
    chores: std::ops::RangeInclusive<usize>,
    lo: i64,
) -> impl Strategy<Value = Instance> {
    (agents, chores).prop_flat_map(move |(n, m)| {
        prop::collection::vec(prop::collection::vec(lo..=20i64, m), n)
            .prop_map(|rows| Instance::from_ints(&rows).unwrap())
    })
}

/// An instance with an owner per chore and strictly positive prices.
fn allocated(
    n: std::ops::RangeInclusive<usize>,
    m: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (Instance, Vec<usize>, PriceVector)> {
    instance(n, m, 1).prop_flat_map(|inst| {
        let (n, m) = (inst.agents(), inst.chores());
        (
            Just(inst),
            prop::collection::vec(0..n, m),
            prop::collection::vec(1..=12i64, m)
                .prop_map(|p| PriceVector::new(p.into_iter().map(|v| rat(v, 4)).collect()).unwrap()),
        )
    })
}

fn from_owners(n: usize, owners: &[usize]) -> SurplusAllocation {
    let mut sets = vec![BTreeSet::new(); n];
    for (c, &i) in owners.iter().enumerate() {
        sets[i].insert(c);
    }
    SurplusAllocation::from_chore_sets(&sets, owners.len()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn costs_and_payments_are_additive((inst, owners, prices) in allocated(1..=3, 1..=8), split in prop::collection::vec(any::<bool>(), 8)) {
        let all: Bundle = (0..inst.chores()).map(ChoreCopy::original).chain(owners.iter().map(|&c| ChoreCopy { chore: c % inst.chores(), copy: 1 })).collect();
        let (s, t): (Vec<ChoreCopy>, Vec<ChoreCopy>) = all.iter().enumerate().fold((vec![], vec![]), |(mut s, mut t), (k, c)| {
            if split[k % 8] { s.push(*c) } else { t.push(*c) }
            (s, t)
        });
        for i in 0..inst.agents() {
            prop_assert_eq!(
                bundle_disutility(&inst, i, &all).unwrap(),
                bundle_disutility(&inst, i, &s).unwrap() + bundle_disutility(&inst, i, &t).unwrap()
            );
        }
        prop_assert_eq!(bundle_payment(&prices, &all).unwrap(), bundle_payment(&prices, &s).unwrap() + bundle_payment(&prices, &t).unwrap());
    }

    #[test]
    fn exact_equilibria_are_balanced(inst in instance(1..=4, 1..=7, 1)) {
        let out = exact_ceei(&inst, SearchLimits::default()).unwrap();
        prop_assert!(verify_fisher_equilibrium(&inst, &out).pass());
        for c in 0..inst.chores() {
            prop_assert_eq!(sum((0..inst.agents()).map(|i| out.x.get(i, c))), one());
        }
        prop_assert!(out.incomes().iter().all(|v| *v == one()));
        prop_assert_eq!(out.prices.total(), int(inst.agents() as i64));
        let g = out.payment_graph();
        for c in 0..inst.chores() {
            let w = sum((0..inst.agents()).filter_map(|i| g.weight(i, c)));
            prop_assert_eq!(&w, &out.prices[c]);
        }
        // Every held chore is MPB for its holder.
        for i in 0..inst.agents() {
            let (_, best) = mpb(&inst, &out.prices, i).unwrap();
            for c in 0..inst.chores() {
                prop_assert!(!g.has_edge(i, c) || best.contains(&c));
            }
        }
    }

    #[test]
    fn cycle_cancellation_shrinks_edges(inst in instance(2..=4, 2..=6, 1), lambda in 1i64..10) {
        // A strict mixture of two equilibria at the same prices.
        let out = approx_ceei(&inst, &default_epsilon(&inst)).unwrap();
        let vertex = make_acyclic(&inst, &out).unwrap();
        let (n, m) = (inst.agents(), inst.chores());
        let base: Vec<Vec<_>> = (0..n).map(|i| (0..m).map(|c| out.x.get(i, c).clone()).collect()).collect();
        let l = rat(lambda, 10);
        let mixed = (0..n).map(|i| (0..m).map(|c| &l * &base[i][c] + (one() - &l) * vertex.x.get(i, c)).collect()).collect();
        let start = chorefair::MarketOutcome {
            x: chorefair::FractionalAllocation::new(mixed).unwrap(),
            ..out.clone()
        };
        prop_assert!(verify_fisher_equilibrium(&inst, &start).pass());
        let (res, stats) = make_acyclic_traced(&inst, &start).unwrap();
        prop_assert!(stats.edge_counts.windows(2).all(|w| w[1] < w[0]), "{:?}", stats.edge_counts);
        let g = res.payment_graph();
        prop_assert!(g.is_forest());
        prop_assert!(g.edge_count() <= n + m - 1);
        prop_assert!(verify_fisher_equilibrium(&inst, &res).pass());
    }

    #[test]
    fn phase_one_only_deletes(inst in instance(2..=5, 2..=9, 1)) {
        let out = make_acyclic(&inst, &approx_ceei(&inst, &default_epsilon(&inst)).unwrap()).unwrap();
        let mut st = RoundingState::new(&out).unwrap();
        let before: BTreeSet<(usize, usize)> = st.graph.edges().map(|(e, _)| e).collect();
        phase1(&mut st).unwrap();
        let after: BTreeSet<(usize, usize)> = st.graph.edges().map(|(e, _)| e).collect();
        prop_assert!(after.is_subset(&before));
        let deletions = st.trace.iter().filter(|e| matches!(e, TraceEvent::DeleteEdge { .. })).count();
        prop_assert_eq!(deletions, before.len() - after.len());
        prop_assert!(deletions <= inst.agents() + inst.chores() - 1);
        // One checkpoint up front, one per deletion.
        prop_assert_eq!(st.checkpoints.len(), deletions + 1);
        let n = inst.agents() as i64;
        let (lo, hi) = (one() - &st.epsilon, one() + int(2 * n - 1) * &st.epsilon);
        prop_assert!(st.checkpoints.iter().flatten().all(|v| *v >= lo && *v <= hi));
    }

    #[test]
    fn surplus_output_shape(inst in instance(1..=5, 1..=9, 1), exact in any::<bool>()) {
        let opts = SolveOptions { solver: if exact { CeeiSolver::Exact } else { CeeiSolver::Approx }, ..SolveOptions::default() };
        let r = fair_and_efficient(&inst, &opts).unwrap();
        let n = inst.agents();
        prop_assert!(r.surplus < n.max(1));
        let mut extra = vec![0usize; n];
        for (i, c) in r.allocation.items() {
            if c.copy > 0 {
                prop_assert_eq!(r.parents[i], Some(c.chore));
                extra[i] += 1;
            }
        }
        prop_assert!(extra.iter().all(|&k| k <= 1));
        for (i, b) in r.allocation.bundles().iter().enumerate() {
            let (_, best) = mpb(&inst, &r.prices, i).unwrap();
            prop_assert!(b.iter().all(|c| best.contains(&c.chore)));
        }
        prop_assert!(check_ef1(&inst, &r.allocation).unwrap().holds);
        prop_assert!(check_pef1(&r.prices, &r.allocation).unwrap().holds);
        let eq = check_fisher_eq(&inst, &r.allocation, &r.prices).unwrap().holds;
        prop_assert!(eq);
        prop_assert!(check_fpo(&inst, &r.allocation, VerifyLimits::default()).unwrap().holds);
    }

    #[test]
    fn pipelines_are_deterministic(inst in instance(1..=4, 1..=8, 1), three in instance(3..=3, 1..=8, 0)) {
        let a = fair_and_efficient(&inst, &SolveOptions::default()).unwrap();
        let b = fair_and_efficient(&inst, &SolveOptions::default()).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a.trace, b.trace);
        let x = solve_three(&three).unwrap();
        let y = solve_three(&three).unwrap();
        prop_assert_eq!(serde_json::to_string(&x).unwrap(), serde_json::to_string(&y).unwrap());
    }

    #[test]
    fn perturbation_keeps_strict_order(inst in instance(1..=3, 1..=10, 0), pairs in prop::collection::vec((any::<u16>(), any::<u16>()), 50)) {
        let (p, eps) = perturb_nondegenerate(&inst);
        prop_assert!(eps > rat(0, 1));
        let m = inst.chores();
        let subset = |mask: u16| (0..m).filter(move |c| mask >> c & 1 == 1);
        for i in 0..inst.agents() {
            for &(s, t) in &pairs {
                let (ds, dt) = (inst.cost_of(i, subset(s)), inst.cost_of(i, subset(t)));
                let (ps, pt) = (p.cost_of(i, subset(s)), p.cost_of(i, subset(t)));
                if ds > dt {
                    prop_assert!(ps > pt);
                }
                if subset(s).collect::<Vec<_>>() != subset(t).collect::<Vec<_>>() {
                    prop_assert_ne!(ps, pt);
                }
            }
        }
    }

    #[test]
    fn failed_certificates_carry_reproducible_witnesses((inst, owners, prices) in allocated(1..=3, 1..=6)) {
        let alloc = from_owners(inst.agents(), &owners);
        let limits = VerifyLimits::default();
        let certs = [
            check_ef1(&inst, &alloc).unwrap(),
            check_efx(&inst, &alloc).unwrap(),
            check_tefx(&inst, &alloc).unwrap(),
            check_proportional(&inst, &alloc).unwrap(),
            check_pef1(&prices, &alloc).unwrap(),
            check_fisher_eq(&inst, &alloc, &prices).unwrap(),
            check_po_brute(&inst, &alloc, limits).unwrap(),
            check_fpo(&inst, &alloc, limits).unwrap(),
        ];
        for cert in &certs {
            prop_assert_eq!(cert.holds, cert.witness.is_none());
            if !cert.holds {
                prop_assert!(witness_reproduces(&inst, &alloc, Some(&prices), cert), "{:?}", cert);
            }
        }
        let again = check_fpo(&inst, &alloc, limits).unwrap();
        prop_assert_eq!(&again, &certs[7]);
    }

    #[test]
    fn fpo_implies_po((inst, owners, _) in allocated(2..=3, 1..=6)) {
        let alloc = from_owners(inst.agents(), &owners);
        let limits = VerifyLimits::default();
        if check_fpo(&inst, &alloc, limits).unwrap().holds {
            prop_assert!(check_po_brute(&inst, &alloc, limits).unwrap().holds);
        }
    }
}
