//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line
//! with its runtime; the process exits non-zero if any criterion fails or
//! overruns its time limit.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use pcl_core::analysis::{
    converse_cut, corner_points, exact_optimality_threshold, memory_lattice, padded_corner_checks,
};
use pcl_core::audit::{
    audit_exact, audit_sampled, enumerate_per_file_probabilities, leakage_demo_man, per_file_probability_oracle,
    PerFileView, SampleConfig, DEFAULT_EVENT_CAP,
};
use pcl_core::combinatorics::RngStream;
use pcl_core::decoder::decode_user;
use pcl_core::model::{all_demand_vectors, enumerate_demand_matrices, DemandMatrix, SystemParams, DEFAULT_DEMAND_CAP};
use pcl_core::schemes::{
    Corner, DeliveryRandomness, MdsScheme, Scheme, SchemeInstance, SchemeKind, SchemeSpec, VirtualUser,
};
use pcl_core::simulate::simulate_demand;
use pcl_core::Rational;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn params(k: usize, n: usize, l: usize) -> SystemParams {
    SystemParams::new(k, n, l).unwrap()
}

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Places once, then delivers and decodes every matrix in `demands`.
fn decode_all(p: &SystemParams, spec: &SchemeSpec, demands: &[DemandMatrix], seed: u64) -> Result<Rational, String> {
    let inst = SchemeInstance::build(p, spec, 2).map_err(|e| e.to_string())?;
    let lib = inst.library(seed);
    let stream = RngStream::new(seed, 1);
    let placement = inst.place_random(&lib, &mut stream.rng()).map_err(|e| e.to_string())?;
    let mut load = None;
    for (j, d) in demands.iter().enumerate() {
        let r = inst.sample_randomness(&mut stream.child(j as u64).rng());
        let sim = simulate_demand(&inst, &lib, &placement, d, &r).map_err(|e| e.to_string())?;
        ensure!(sim.all_ok(), "{spec:?} {p}: D={d} not decoded bit-exactly");
        ensure!(load.is_none_or(|l| l == sim.load), "{spec:?} {p}: load varies with D");
        load = Some(sim.load);
    }
    Ok(load.unwrap_or_else(Rational::zero))
}

fn c1_uncoded_corner_3_6_2() -> Check {
    let p = params(3, 6, 2);
    let spec = SchemeSpec::Mds { t: 0 };
    let inst = SchemeInstance::build(&p, &spec, 2).map_err(|e| e.to_string())?;
    ensure!(inst.subpacketization() == 8, "sub-packetization {}", inst.subpacketization());
    let d = DemandMatrix::new(&p, vec![vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
    let lib = inst.library(3);
    let placement = inst.place_random(&lib, &mut RngStream::new(3, 1).rng()).unwrap();
    let packet = inst.deliver_with(&placement, &d, &DeliveryRandomness::default()).unwrap();
    ensure!(
        (packet.payload_rows(), inst.code().k()) == (14, 8),
        "raw load {}/{}",
        packet.payload_rows(),
        inst.code().k()
    );
    let demands = enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap();
    ensure!(demands.len() == 3375, "{} demand matrices", demands.len());
    let load = decode_all(&p, &spec, &demands, 7)?;
    ensure!(load == q(14, 8), "load {load}");
    Ok(format!("load 14/8, sub-packetization 8, {} matrices decoded", demands.len()))
}

fn c2_coded_corner_3_6_2() -> Check {
    let p = params(3, 6, 2);
    let spec = SchemeSpec::Mds { t: 1 };
    let inst = SchemeInstance::build(&p, &spec, 3).map_err(|e| e.to_string())?;
    ensure!(inst.memory() == q(24, 7), "memory {}", inst.memory());
    ensure!((inst.code().n(), inst.code().k()) == (8, 7), "code ({}, {})", inst.code().n(), inst.code().k());
    let lib = inst.library(2);
    let placement = inst.place_random(&lib, &mut RngStream::new(2, 2).rng()).unwrap();
    let stream = RngStream::new(2, 3);
    for (j, d) in enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap().iter().enumerate() {
        let packet = inst
            .deliver(&placement, d, &mut stream.child(j as u64).rng())
            .map_err(|e| e.to_string())?;
        ensure!(packet.load() == q(8, 7), "load {}", packet.load());
        for k in 1..=3 {
            let report = decode_user(k, placement.cache(k), d.user(k), &packet).map_err(|e| e.to_string())?;
            for f in &report.files {
                ensure!(
                    (f.pieces_from_cache, f.pieces_from_delivery) == (4, 3),
                    "user {k} file {}: {} cached + {} delivered",
                    f.file,
                    f.pieces_from_cache,
                    f.pieces_from_delivery
                );
                ensure!(f.data.as_deref() == Some(lib.file(f.file)), "user {k} file {} differs", f.file);
            }
        }
    }
    Ok("M 24/7, load 8/7, every file from 4 cached + 3 delivered pieces of an (8,7) code".into())
}

fn c3_two_user_corner() -> Check {
    let p = params(2, 3, 1);
    let s = MdsScheme::new(p, 1).map_err(|e| e.to_string())?;
    ensure!(s.memory() == Rational::from_integer(2), "memory {}", s.memory());
    ensure!(s.load() == q(1, 3), "load {}", s.load());
    let d = DemandMatrix::new(&p, vec![vec![1], vec![2]]).unwrap();
    let plan = s.plan(&d, &DeliveryRandomness::default()).unwrap();
    ensure!(plan.len() == 1, "{} messages", plan.len());
    let names: Vec<String> = plan[0]
        .entries
        .iter()
        .map(|&(f, l)| format!("f{f}{}", s.label_name(l)))
        .collect();
    ensure!(names == ["f1{2}", "f2{1}", "f3{1,2}"], "message {names:?}");
    let load = decode_all(&p, &SchemeSpec::Mds { t: 1 }, &[d], 1)?;
    ensure!(load == q(1, 3), "measured load {load}");
    Ok(format!("single message {}", names.join(" + ")))
}

fn c4_corner() -> Check {
    for k in 2..=6 {
        for (n, l) in [(2, 1), (3, 2)] {
            let p = params(k, n, l);
            let inst = SchemeInstance::build(&p, &SchemeSpec::MdsCorner, 2).map_err(|e| e.to_string())?;
            let lib = inst.library(k as u64);
            let placement = inst.place_random(&lib, &mut RngStream::new(5, k as u64).rng()).unwrap();
            for user in 1..=k {
                let measured = q(placement.cache(user).symbol_count() as i128, inst.file_len() as i128);
                let expected = q((2 * k as i128 - 1) * n as i128, 2 * k as i128);
                ensure!(measured == expected, "K={k}: cached {measured} files, expected {expected}");
            }
            let d = DemandMatrix::random(&p, &mut RngStream::new(6, k as u64).rng());
            let sim = simulate_demand(&inst, &lib, &placement, &d, &DeliveryRandomness::default()).unwrap();
            ensure!(sim.all_ok(), "K={k}: decode failed");
            ensure!(sim.load == q(l as i128, 2 * k as i128), "K={k}: load {}", sim.load);
        }
    }
    for (k, n, l) in [(2, 2, 1), (3, 3, 1)] {
        let p = params(k, n, l);
        let demands = enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap();
        decode_all(&p, &SchemeSpec::MdsCorner, &demands, 9)?;
    }
    Ok("K in 2..=6 measured M and load exact; every D decoded at (2,2,1) and (3,3,1)".into())
}

fn c5_envelope() -> Check {
    let vu = corner_points(SchemeKind::VirtualUser, &params(3, 6, 2));
    let at3 = vu.eval(Rational::from_integer(3)).map_err(|e| e.to_string())?;
    let at247 = vu.eval(q(24, 7)).map_err(|e| e.to_string())?;
    ensure!(at3 == q(23, 12), "R_v(3) = {at3}");
    ensure!(at247 == q(3550, 2457), "R_v(24/7) = {at247}");
    Ok(format!("R_v(3) = {at3}, R_v(24/7) = {at247}"))
}

fn c6_no_duplicates() -> Check {
    let mut checked = 0usize;
    for (k, n, l) in [(2, 2, 1), (2, 3, 1), (3, 3, 1), (3, 4, 2), (4, 4, 1)] {
        let p = params(k, n, l);
        let demands = enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap();
        for t in 0..=k {
            let s = MdsScheme::new(p, t).map_err(|e| e.to_string())?;
            for d in &demands {
                let plan = s.plan(d, &DeliveryRandomness::default()).unwrap();
                let mut seen = BTreeSet::new();
                for msg in &plan {
                    for &entry in &msg.entries {
                        ensure!(seen.insert(entry), "{p} t={t} D={d}: piece {entry:?} sent twice");
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (size, t, D) cases without a repeated piece"))
}

fn c7_exact_audits() -> Check {
    let schemes: Vec<(String, Box<dyn Scheme>)> = vec![
        ("mds t=0 (2,2,1)".into(), Box::new(MdsScheme::new(params(2, 2, 1), 0).unwrap())),
        ("mds t=0 (2,3,1)".into(), Box::new(MdsScheme::new(params(2, 3, 1), 0).unwrap())),
        ("mds-corner (2,2,1)".into(), Box::new(Corner::new(params(2, 2, 1)).unwrap())),
        ("virtual-user t=2 (2,2,1)".into(), Box::new(VirtualUser::new(params(2, 2, 1), 2, true, true).unwrap())),
    ];
    let mut notes = Vec::new();
    for (name, s) in &schemes {
        let p = *s.params();
        for user in 1..=p.users {
            for d in all_demand_vectors(&p) {
                let r = audit_exact(s.as_ref(), user, &d, DEFAULT_EVENT_CAP).map_err(|e| e.to_string())?;
                ensure!(r.max_tv_rational().is_zero(), "{name} user {user} d={d:?}: TV {}", r.max_tv_exact);
            }
        }
        notes.push(format!("{name} TV 0"));
    }
    Ok(notes.join(", "))
}

fn c8_sampled_audits() -> Check {
    let cfg = SampleConfig::new(10_000, 8);
    let schemes: Vec<(String, Box<dyn Scheme>)> = vec![
        ("mds t=0 (3,3,1)".into(), Box::new(MdsScheme::new(params(3, 3, 1), 0).unwrap())),
        ("mds t=1 (3,3,1)".into(), Box::new(MdsScheme::new(params(3, 3, 1), 1).unwrap())),
        ("virtual-user t=1 (2,3,1)".into(), Box::new(VirtualUser::new(params(2, 3, 1), 1, true, true).unwrap())),
        ("virtual-user t=2 (2,3,1)".into(), Box::new(VirtualUser::new(params(2, 3, 1), 2, true, true).unwrap())),
        ("virtual-user t=3 (2,3,1)".into(), Box::new(VirtualUser::new(params(2, 3, 1), 3, true, true).unwrap())),
    ];
    let mut notes = Vec::new();
    for (name, s) in &schemes {
        let mut worst = 0f64;
        for d in all_demand_vectors(s.params()) {
            let r = audit_sampled(s.as_ref(), 1, &d, &cfg).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_tv);
        }
        ensure!(worst <= 0.05, "{name}: empirical TV {worst:.4} > 0.05");
        notes.push(format!("{name} {worst:.4}"));
    }
    Ok(format!("max empirical TV: {}", notes.join(", ")))
}

fn c9_man_leakage() -> Check {
    let p = params(2, 2, 1);
    let plain = leakage_demo_man(&p, 1, false, DEFAULT_EVENT_CAP).map_err(|e| e.to_string())?;
    ensure!(plain.max_tv_rational() == Rational::one(), "plain TV {}", plain.max_tv_exact);
    ensure!(
        plain.pairs.iter().any(|pair| pair.disjoint_support && pair.tv_exact == "1"),
        "no pair with disjoint supports"
    );
    let precoded = leakage_demo_man(&p, 1, true, DEFAULT_EVENT_CAP).map_err(|e| e.to_string())?;
    ensure!(precoded.max_tv_rational() > Rational::zero(), "precoded TV {}", precoded.max_tv_exact);
    Ok(format!(
        "TV {} with disjoint supports; with precoding TV {}",
        plain.max_tv_exact, precoded.max_tv_exact
    ))
}

fn c10_oracles() -> Check {
    for k in [2usize, 3] {
        for n in [2usize, 3] {
            let p = params(k, n, 1);
            let mds = MdsScheme::new(p, 0).unwrap();
            let corner = Corner::new(p).unwrap();
            let mds_expected = per_file_probability_oracle(SchemeKind::Mds, &p, Some(0)).unwrap();
            let corner_expected = per_file_probability_oracle(SchemeKind::MdsCorner, &p, None).unwrap();
            for d in enumerate_demand_matrices(&p, DEFAULT_DEMAND_CAP).unwrap() {
                for file in 1..=n {
                    let got = enumerate_per_file_probabilities(&mds, 1, &d, file, PerFileView::Ordered).unwrap();
                    ensure!(got == BTreeSet::from([mds_expected]), "mds K={k} D={d} file {file}: {got:?}");
                    let got =
                        enumerate_per_file_probabilities(&corner, 1, &d, file, PerFileView::Unordered).unwrap();
                    ensure!(got == BTreeSet::from([corner_expected]), "corner K={k} D={d} file {file}: {got:?}");
                }
            }
        }
    }
    Ok("per-file probabilities 1/4, 1/576 and 1/3, 1/10 for K = 2, 3".into())
}

fn optimality_grid() -> Vec<SystemParams> {
    let mut grid = Vec::new();
    for k in 2..=6 {
        for n in 2..=8 {
            for l in 1..=3usize.min(n) {
                grid.push(params(k, n, l));
            }
        }
    }
    grid
}

fn c11_exact_region() -> Check {
    let mut points = 0;
    for p in optimality_grid() {
        let mds = corner_points(SchemeKind::Mds, &p);
        let threshold = exact_optimality_threshold(&p);
        let mut lattice = memory_lattice(p.files, 50);
        lattice.push(threshold);
        for m in lattice.into_iter().filter(|&m| m >= threshold) {
            let rm = mds.eval(m).unwrap();
            let conv = converse_cut(&p, m).unwrap();
            ensure!(rm == conv, "{p} M={m}: R_m {rm} vs {conv}");
            points += 1;
        }
    }
    Ok(format!("R_m = L(1-M/N) at {points} points above the threshold"))
}

fn c12_factor_two() -> Check {
    let two = Rational::from_integer(2);
    let mut points = 0;
    for p in optimality_grid() {
        let vu = corner_points(SchemeKind::VirtualUser, &p);
        let mds = corner_points(SchemeKind::Mds, &p);
        let half = Rational::from_integer(p.files as i128) / two;
        for m in memory_lattice(p.files, 50).into_iter().filter(|&m| m >= half) {
            let bound = two * converse_cut(&p, m).unwrap();
            let (rv, rm) = (vu.eval(m).unwrap(), mds.eval(m).unwrap());
            ensure!(rv <= bound && rm <= bound, "{p} M={m}: R_v {rv}, R_m {rm}, bound {bound}");
            points += 1;
        }
    }
    Ok(format!("R_v, R_m <= 2L(1-M/N) at {points} points with M >= N/2"))
}

fn c13_padded_corners() -> Check {
    let mut cases = 0;
    for k in 2..=5 {
        for n in 2..=6 {
            for l in 1..=2 {
                let p = params(k, n, l);
                for (tp, rv, bound) in padded_corner_checks(&p) {
                    ensure!(rv <= bound, "{p} t'={tp}: {rv} > {bound}");
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (K,N,L,t') cases"))
}

fn c14_figure_ordering() -> Check {
    for (k, n) in [(10, 20), (10, 5)] {
        let p = params(k, n, 1);
        let base = corner_points(SchemeKind::Baseline, &p);
        let vu = corner_points(SchemeKind::VirtualUser, &p);
        let mds = corner_points(SchemeKind::Mds, &p);
        let half = Rational::from_integer(n as i128) / 2;
        for m in memory_lattice(n, 50) {
            let (rb, rv, rm) = (base.eval(m).unwrap(), vu.eval(m).unwrap(), mds.eval(m).unwrap());
            ensure!(rv <= rb, "{p} M={m}: R_v {rv} > R_base {rb}");
            ensure!(rm <= rb, "{p} M={m}: R_m {rm} > R_base {rb}");
            if m < half {
                ensure!(rv <= rm, "{p} M={m}: R_v {rv} > R_m {rm}");
            }
        }
    }
    Ok("R_v, R_m <= R_base everywhere and R_v <= R_m below N/2 at (10,20,1), (10,5,1)".into())
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("mds t=0 at (3,6,2)", 30, c1_uncoded_corner_3_6_2),
        ("mds t=1 at (3,6,2)", 30, c2_coded_corner_3_6_2),
        ("mds t=1 at (2,3,1)", 5, c3_two_user_corner),
        ("large-memory corner scheme", 60, c4_corner),
        ("virtual-user envelope", 5, c5_envelope),
        ("no piece sent twice", 120, c6_no_duplicates),
        ("exact privacy audits", 600, c7_exact_audits),
        ("sampled privacy audits", 300, c8_sampled_audits),
        ("classical scheme leakage", 60, c9_man_leakage),
        ("per-file view oracles", 120, c10_oracles),
        ("exact optimality region", 10, c11_exact_region),
        ("factor-two gap", 10, c12_factor_two),
        ("padded-corner bound", 10, c13_padded_corners),
        ("tradeoff figure ordering", 10, c14_figure_ordering),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > Duration::from_secs(*limit) => Err(format!("took longer than {limit} s")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => ("FAIL", detail),
        };
        println!(
            "criterion {:>2} {tag} [{:>7.2} s / {limit} s] {name}: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
        failed += usize::from(outcome.is_err());
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
