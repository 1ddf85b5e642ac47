mod common;

use std::collections::BTreeSet;

use chorefair::rational::{int, rat};
use chorefair::three_agent::{solve_three, Branch, Kind};
use chorefair::verify::check_proportional;
use common::{proportional_fixture, random_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pinned_instance_takes_the_proportional_exit() {
    let inst = proportional_fixture();
    let r = solve_three(&inst).unwrap();
    assert_eq!(r.kind, Kind::Proportional);
    assert_eq!(r.trace.last().unwrap().branch, Branch::Proportional);
    assert!(r.trace[..r.trace.len() - 1]
        .iter()
        .all(|t| matches!(t.branch, Branch::MoveChore | Branch::Transfer)));
    assert!(check_proportional(&inst, &r.allocation).unwrap().holds);
    // Each agent pays at most a third of her total, recomputed by hand.
    let held: BTreeSet<usize> = r.allocation.items().map(|(_, c)| c.chore).collect();
    assert_eq!(held.len(), 7);
    for i in 0..3 {
        let mine = inst.cost_of(i, r.allocation.bundle(i).iter().map(|c| c.chore));
        assert!(mine * int(3) <= inst.total(i), "agent {i}");
    }
}

#[test]
fn seeded_fuzz_reaches_both_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut kinds = BTreeSet::new();
    for _ in 0..2000 {
        let inst = random_instance(&mut rng, 3, 7, 0, 20);
        let r = solve_three(&inst).unwrap();
        kinds.insert(format!("{:?}", r.kind));
        assert!(r.perturbation > rat(0, 1));
    }
    assert_eq!(kinds.len(), 2, "{kinds:?}");
}
