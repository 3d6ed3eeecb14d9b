use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use pcl_core::analysis::{large_memory_corner, man_corner, mds_corner, virtual_user_corner};
use pcl_core::audit::{canonical_view, per_file_probability_oracle, raw_distributions, raw_view};
use pcl_core::combinatorics::{binom, pow_sets, RngStream};
use pcl_core::decoder::decode_user;
use pcl_core::model::{enumerate_demand_matrices, DemandMatrix, SystemParams, DEFAULT_DEMAND_CAP};
use pcl_core::schemes::{
    DeliveryRandomness, MdsScheme, Scheme, SchemeInstance, SchemeKind, SchemeSpec, VirtualUser,
};
use pcl_core::simulate::simulate_demand;
use pcl_core::Rational;
use proptest::prelude::*;

fn params(k: usize, n: usize, l: usize) -> SystemParams {
    SystemParams::new(k, n, l).unwrap()
}

fn grid(max_k: usize, max_n: usize, max_l: usize) -> Vec<SystemParams> {
    let mut out = Vec::new();
    for k in 1..=max_k {
        for n in 1..=max_n {
            for l in 1..=max_l.min(n) {
                out.push(params(k, n, l));
            }
        }
    }
    out
}

/// Every corner with its closed-form (memory, load), VU limited to `max_labels`.
fn corners_with_closed_form(p: &SystemParams, max_labels: u128) -> Vec<(SchemeSpec, (Rational, Rational))> {
    let mut out = Vec::new();
    for t in 0..=p.users {
        out.push((SchemeSpec::Mds { t }, mds_corner(p, t)));
    }
    if p.users >= 2 {
        out.push((SchemeSpec::MdsCorner, large_memory_corner(p)));
    }
    for t_prime in 0..=p.users {
        out.push((SchemeSpec::Man { t_prime, precoding: true }, man_corner(p, t_prime)));
    }
    let u = p.demand_vectors() * p.users as u128;
    for t in 1..=u {
        if binom(u as i64, t as i64) <= max_labels {
            out.push((SchemeSpec::virtual_user(t as usize), virtual_user_corner(p, t)));
        }
    }
    let n = Rational::from_integer(p.files as i128);
    for m in [Rational::zero(), n / 2, n] {
        out.push((SchemeSpec::Baseline { memory: m }, (m, n - m)));
    }
    out
}

#[test]
fn memory_and_load_match_closed_forms() {
    for p in grid(4, 6, 2) {
        let d = DemandMatrix::random(&p, &mut RngStream::new(3, p.files as u64).rng());
        for (spec, (memory, load)) in corners_with_closed_form(&p, 3_000) {
            let inst = SchemeInstance::build(&p, &spec, 1).unwrap();
            let lib = inst.library(5);
            let placement = inst.place_random(&lib, &mut RngStream::new(5, 0).rng()).unwrap();
            let b = inst.file_len() as i128;
            for user in 1..=p.users {
                let cached = Rational::from_integer(placement.cache(user).symbol_count() as i128);
                assert_eq!(cached, memory * b, "{spec:?} {p} user {user}");
            }
            let r = inst.sample_randomness(&mut RngStream::new(5, 1).rng());
            let sim = simulate_demand(&inst, &lib, &placement, &d, &r).unwrap();
            assert_eq!(sim.load, load, "{spec:?} {p}");
            assert!(sim.all_ok(), "{spec:?} {p}");
        }
    }
}

#[test]
fn no_piece_sent_twice_mds() {
    for p in grid(4, 4, 2) {
        let demands = enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap();
        for t in 0..=p.users {
            let s = MdsScheme::new(p, t).unwrap();
            for d in &demands {
                let mut seen = BTreeSet::new();
                for msg in s.plan(d, &DeliveryRandomness::default()).unwrap() {
                    for entry in msg.entries {
                        assert!(seen.insert(entry), "{p} t={t} D={d}: {entry:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn symmetric_difference_is_injective() {
    for k in 0..=5 {
        let sets: Vec<BTreeSet<usize>> = pow_sets(k).into_iter().map(|s| s.into_iter().collect()).collect();
        for q in &sets {
            let images: BTreeSet<BTreeSet<usize>> = sets.iter().map(|s| s.symmetric_difference(q).copied().collect()).collect();
            assert_eq!(images.len(), sets.len(), "K={k} Q={q:?}");
        }
    }
}

#[test]
fn mds_decode_counts() {
    for p in grid(4, 4, 2).into_iter().filter(|p| p.users >= 2) {
        let k = p.users;
        let half = 1usize << (k - 1);
        for t in 0..=k {
            let inst = SchemeInstance::build(&p, &SchemeSpec::Mds { t }, 1).unwrap();
            let new_symbols: u128 = (t as i64..k as i64).map(|j| binom(k as i64 - 1, j)).sum();
            let lib = inst.library(1);
            let placement = inst.place_random(&lib, &mut RngStream::new(1, t as u64).rng()).unwrap();
            let d = DemandMatrix::random(&p, &mut RngStream::new(2, t as u64).rng());
            let packet = inst.deliver_with(&placement, &d, &DeliveryRandomness::default()).unwrap();
            for user in 1..=k {
                let report = decode_user(user, placement.cache(user), d.user(user), &packet).unwrap();
                for f in &report.files {
                    assert_eq!(f.pieces_from_cache, half, "{p} t={t}");
                    assert_eq!(f.pieces_from_delivery as u128, new_symbols, "{p} t={t}");
                }
            }
        }
    }
}

#[test]
fn virtual_user_members_miss_exactly_their_demands() {
    for p in [params(2, 2, 1), params(2, 3, 2), params(3, 3, 1), params(2, 4, 2)] {
        let u = p.demand_vectors() as usize * p.users;
        for t in 1..u.min(4) {
            let vu = VirtualUser::new(p, t, true, true).unwrap();
            let mut rng = RngStream::new(4, t as u64).rng();
            for _ in 0..5 {
                let d = DemandMatrix::random(&p, &mut rng);
                let r = DeliveryRandomness::sample(&vu.randomness_shape(), &mut rng);
                for msg in vu.plan(&d, &r).unwrap() {
                    assert_eq!(msg.entries.len(), p.demands_per_user * (t + 1));
                    let members: BTreeSet<usize> = msg.entries.iter().flat_map(|&(_, l)| vu.label_set(l)).collect();
                    assert_eq!(members.len(), t + 1);
                    for k in members.iter().copied().filter(|&k| k <= p.users) {
                        let missing: Vec<usize> = msg
                            .entries
                            .iter()
                            .filter(|&&(_, l)| !vu.cached_by(k, l))
                            .map(|&(f, _)| f)
                            .collect();
                        assert_eq!(missing, d.user(k), "{p} t={t} user {k}");
                    }
                }
            }
        }
    }
}

// The decoder never sees the demand matrix, only the user's cache, its own
// demand and the broadcast. Changing other users' demands while keeping the
// same broadcast must leave the report unchanged.
#[test]
fn decoder_is_blind_to_other_demands() {
    let p = params(3, 4, 2);
    let inst = SchemeInstance::build(&p, &SchemeSpec::Mds { t: 1 }, 2).unwrap();
    let lib = inst.library(8);
    let placement = inst.place_random(&lib, &mut RngStream::new(8, 0).rng()).unwrap();
    let d = DemandMatrix::new(&p, vec![vec![1, 2], vec![3, 4], vec![1, 3]]).unwrap();
    let packet = inst.deliver_with(&placement, &d, &DeliveryRandomness::default()).unwrap();
    let reference = decode_user(1, placement.cache(1), d.user(1), &packet).unwrap();
    for other in [vec![vec![1, 2], vec![1, 2], vec![1, 2]], vec![vec![1, 2], vec![2, 4], vec![3, 4]]] {
        let perturbed = DemandMatrix::new(&p, other).unwrap();
        assert_eq!(perturbed.user(1), d.user(1));
        let report = decode_user(1, placement.cache(1), perturbed.user(1), &packet).unwrap();
        assert_eq!(report, reference);
    }
}

#[test]
fn per_file_factorization() {
    // Under a fixed cache, the raw view probability is the product over
    // files of the per-file probabilities.
    for n in [1usize, 2] {
        let p = params(2, n, 1);
        let mds = MdsScheme::new(p, 0).unwrap();
        let per_file = per_file_probability_oracle(SchemeKind::Mds, &p, Some(0)).unwrap();
        let joint = (0..n).fold(Rational::from_integer(1), |acc, _| acc * per_file);
        for d in enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap() {
            let grouped = raw_distributions(&mds, 1, &d, |_, metas| raw_view(metas)).unwrap();
            for (cache, dist) in &grouped {
                for key in dist.counts.keys() {
                    assert_eq!(dist.probability(key), joint, "N={n} D={d} cache {cache:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_views_are_deterministic(seed in any::<u64>(), t in 0usize..=3, user in 1usize..=3) {
        let p = params(3, 3, 2);
        let inst = SchemeInstance::build(&p, &SchemeSpec::Mds { t }, 1).unwrap();
        let run = || {
            let stream = RngStream::new(seed, 0);
            let maps = inst.sample_label_maps(&mut stream.rng());
            let d = DemandMatrix::random(&p, &mut stream.child(1).rng());
            let r = inst.sample_randomness(&mut stream.child(2).rng());
            let cache = inst.cached_pieces(user, &maps);
            let metas = inst.metadata(&maps, &d, &r).unwrap();
            canonical_view(&cache, &metas)
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn random_demands_decode_with_constant_load(seed in any::<u64>(), kind in 0usize..4) {
        let p = params(3, 4, 2);
        let spec = [SchemeSpec::Mds { t: 0 }, SchemeSpec::Mds { t: 2 }, SchemeSpec::MdsCorner, SchemeSpec::virtual_user(17)][kind].clone();
        let inst = SchemeInstance::build(&p, &spec, 2).unwrap();
        let lib = inst.library(seed);
        let stream = RngStream::new(seed, 9);
        let placement = inst.place_random(&lib, &mut stream.rng()).unwrap();
        let mut loads = BTreeMap::new();
        for j in 0..3u64 {
            let d = DemandMatrix::random(&p, &mut stream.child(j).rng());
            let r = inst.sample_randomness(&mut stream.child(100 + j).rng());
            let sim = simulate_demand(&inst, &lib, &placement, &d, &r).unwrap();
            prop_assert!(sim.all_ok());
            loads.insert(sim.load, ());
        }
        prop_assert_eq!(loads.len(), 1);
        prop_assert_eq!(*loads.keys().next().unwrap(), inst.scheme().load());
    }
}
