//! Closed-form memory-load tradeoffs, their lower convex envelopes, the
//! cut-set converse `L(1 - M/N)` and order-optimality checks.
//!
//! Everything here is exact rational arithmetic; nothing is simulated.

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::schemes::SchemeKind;
use crate::Rational;

pub type Point = (Rational, Rational);

/// Corner points of one scheme and their lower convex envelope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffCurve {
    pub scheme: SchemeKind,
    pub params: SystemParams,
    /// Achievable corner points sorted by memory, duplicates removed.
    pub corners: Vec<Point>,
    /// Vertices of the lower convex envelope, increasing in memory.
    pub envelope: Vec<Point>,
}

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn int(n: usize) -> Rational {
    Rational::from_integer(n as i128)
}

/// Number of effective users once every demand vector is padded to `K` holders.
pub fn effective_users(params: &SystemParams) -> u128 {
    binom(params.files as i64, params.demands_per_user as i64) * params.users as u128
}

/// `(tN/U, L(U-t)/(t+1))` for the padded system of `U` effective users.
pub fn virtual_user_corner(params: &SystemParams, t: u128) -> Point {
    let u = effective_users(params) as i128;
    let t = t as i128;
    let n = params.files as i128;
    let l = params.demands_per_user as i128;
    (r(t * n, u), r(l * (u - t), t + 1))
}

/// The MDS-coded corner at cache parameter `t` in `0..=K`.
pub fn mds_corner(params: &SystemParams, t: usize) -> Point {
    let k = params.users as i64;
    let half = 1i128 << (k - 1);
    let dim = half + (t as i64..k).map(|j| binom(k - 1, j) as i128).sum::<i128>();
    let sent = (1i128 << k) - (0..=t as i64).map(|j| binom(k, j) as i128).sum::<i128>();
    (r(half * params.files as i128, dim), r(params.demands_per_user as i128 * sent, dim))
}

/// `((2K-1)N/(2K), L/(2K))`.
pub fn large_memory_corner(params: &SystemParams) -> Point {
    let k = params.users as i128;
    (r((2 * k - 1) * params.files as i128, 2 * k), r(params.demands_per_user as i128, 2 * k))
}

/// Classical (non-private) corner `(t'N/K, L(K-t')/(t'+1))`.
pub fn man_corner(params: &SystemParams, t_prime: usize) -> Point {
    let k = params.users as i128;
    let t = t_prime as i128;
    (r(t * params.files as i128, k), r(params.demands_per_user as i128 * (k - t), t + 1))
}

/// Whether the large-memory corner replaces the MDS corner at `t = K-1`,
/// which happens when `(2K-1)/(2K) <= 2^{K-1}/(2^{K-1}+1)`.
pub fn replaces_penultimate(users: usize) -> bool {
    let k = users as i128;
    let half = 1i128 << (k - 1);
    r(2 * k - 1, 2 * k) <= r(half, half + 1)
}

/// Corner points of `kind` at `params`, with the lower convex envelope.
pub fn corner_points(kind: SchemeKind, params: &SystemParams) -> TradeoffCurve {
    let n = int(params.files);
    let origin = (Rational::zero(), n);
    let full = (n, Rational::zero());
    let mut corners = match kind {
        SchemeKind::Baseline => vec![origin, full],
        SchemeKind::Man => (0..=params.users).map(|t| man_corner(params, t)).collect(),
        SchemeKind::VirtualUser => std::iter::once(origin)
            .chain((1..=effective_users(params)).map(|t| virtual_user_corner(params, t)))
            .collect(),
        SchemeKind::Mds => {
            let k = params.users;
            let mut pts = vec![origin, large_memory_corner(params)];
            pts.extend(
                (0..=k)
                    .filter(|&t| !(t + 1 == k && replaces_penultimate(k)))
                    .map(|t| mds_corner(params, t)),
            );
            pts
        }
        SchemeKind::MdsCorner => vec![origin, large_memory_corner(params), full],
    };
    corners.sort();
    corners.dedup_by(|b, a| a.0 == b.0);
    let envelope = lower_convex_envelope(&corners);
    TradeoffCurve {
        scheme: kind,
        params: *params,
        corners,
        envelope,
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex hull of points sorted by memory; among equal memories only
/// the first (smallest load) is kept.
pub fn lower_convex_envelope(sorted: &[Point]) -> Vec<Point> {
    let mut hull: Vec<Point> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if hull.last().is_some_and(|last| last.0 == p.0) {
            continue;
        }
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= Rational::zero() {
            hull.pop();
        }
        hull.push(*p);
    }
    hull
}

impl TradeoffCurve {
    pub fn eval(&self, memory: Rational) -> Result<Rational> {
        envelope_eval(self, memory)
    }

    /// Whether the envelope is convex and non-increasing.
    pub fn is_convex_non_increasing(&self) -> bool {
        let e = &self.envelope;
        let slope = |a: &Point, b: &Point| (b.1 - a.1) / (b.0 - a.0);
        e.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 <= w[0].1)
            && e.windows(3).all(|w| slope(&w[0], &w[1]) <= slope(&w[1], &w[2]))
    }
}

/// Value of the lower convex envelope at `memory` by linear interpolation.
pub fn envelope_eval(curve: &TradeoffCurve, memory: Rational) -> Result<Rational> {
    let e = &curve.envelope;
    let (first, last) = (e[0], e[e.len() - 1]);
    if memory < first.0 || memory > last.0 {
        return Err(Error::InvalidParams(format!(
            "memory {memory} outside [{}, {}]",
            first.0, last.0
        )));
    }
    let i = e.partition_point(|p| p.0 < memory);
    if e[i].0 == memory {
        return Ok(e[i].1);
    }
    let (a, b) = (e[i - 1], e[i]);
    Ok(a.1 + (b.1 - a.1) * (memory - a.0) / (b.0 - a.0))
}

/// The cut-set converse `L(1 - M/N)`.
pub fn converse_cut(params: &SystemParams, memory: Rational) -> Result<Rational> {
    let n = int(params.files);
    if memory < Rational::zero() || memory > n {
        return Err(Error::InvalidParams(format!("memory {memory} outside [0, {n}]")));
    }
    Ok(int(params.demands_per_user) * (Rational::from_integer(1) - memory / n))
}

/// `points` evenly spaced memories `jN/(points-1)` covering `[0, N]`.
pub fn memory_lattice(files: usize, points: usize) -> Vec<Rational> {
    assert!(points >= 2, "a lattice needs both endpoints");
    let steps = points as i128 - 1;
    (0..=steps).map(|j| r(j * files as i128, steps)).collect()
}

/// Memory from which the MDS envelope meets the converse:
/// `min{(2K-1)/(2K), 2^{K-1}/(2^{K-1}+1)} N`.
pub fn exact_optimality_threshold(params: &SystemParams) -> Rational {
    let k = params.users as i128;
    let half = 1i128 << (k - 1);
    r(2 * k - 1, 2 * k).min(r(half, half + 1)) * int(params.files)
}

/// One CSV row of emitted curve samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeSample {
    pub scheme: String,
    pub params: SystemParams,
    pub memory: Rational,
    pub load: Rational,
}

impl EnvelopeSample {
    pub const CSV_HEADER: [&'static str; 8] = ["scheme", "K", "N", "L", "M_num", "M_den", "R_num", "R_den"];

    pub fn csv_record(&self) -> [String; 8] {
        [
            self.scheme.clone(),
            self.params.users.to_string(),
            self.params.files.to_string(),
            self.params.demands_per_user.to_string(),
            self.memory.numer().to_string(),
            self.memory.denom().to_string(),
            self.load.numer().to_string(),
            self.load.denom().to_string(),
        ]
    }
}

/// Samples of `curve` at every lattice memory.
pub fn sample_curve(curve: &TradeoffCurve, lattice: &[Rational]) -> Result<Vec<EnvelopeSample>> {
    lattice
        .iter()
        .map(|&m| {
            Ok(EnvelopeSample {
                scheme: curve.scheme.to_string(),
                params: curve.params,
                memory: m,
                load: envelope_eval(curve, m)?,
            })
        })
        .collect()
}

/// Samples of the converse at every lattice memory, tagged `converse`.
pub fn sample_converse(params: &SystemParams, lattice: &[Rational]) -> Result<Vec<EnvelopeSample>> {
    lattice
        .iter()
        .map(|&m| {
            Ok(EnvelopeSample {
                scheme: "converse".into(),
                params: *params,
                memory: m,
                load: converse_cut(params, m)?,
            })
        })
        .collect()
}

/// Order-optimality factor claimed for the virtual-user scheme against
/// converses established elsewhere. Informational only.
pub fn table_factor(params: &SystemParams, memory: Rational) -> Option<u32> {
    let (k, n, l) = (params.users, params.files, params.demands_per_user);
    let above = memory >= r(n as i128, k as i128);
    if memory >= int(n) / 2 {
        Some(2)
    } else if l == 1 && n <= k {
        Some(8)
    } else if l == 1 && above {
        Some(4)
    } else if l > 1 && (n <= l * k || above) {
        Some(22)
    } else {
        None
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapPoint {
    pub users: usize,
    pub files: usize,
    pub demands_per_user: usize,
    pub memory: String,
    pub virtual_user: String,
    pub mds: String,
    pub converse: String,
    /// Achievable over converse; absent where the converse is zero.
    pub ratio_virtual_user: Option<f64>,
    pub ratio_mds: Option<f64>,
    pub table_factor: Option<u32>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GapReport {
    pub points: Vec<GapPoint>,
    /// Both envelopes within twice the converse for `M >= N/2`.
    pub factor_two_holds: bool,
    /// MDS envelope equal to the converse above the exact-optimality threshold.
    pub exact_region_holds: bool,
    /// Virtual-user corners at `t = C(N,L) t'` within `2L(K-t')/(t'+1)`.
    pub padded_corner_bound_holds: bool,
    pub violations: Vec<String>,
}

impl GapReport {
    pub fn all_hold(&self) -> bool {
        self.factor_two_holds && self.exact_region_holds && self.padded_corner_bound_holds
    }
}

/// Checks the factor-two bound, the exact-optimality region and the padded
/// corner bound on every parameter triple at every lattice memory.
pub fn gap_report(grid: &[SystemParams], lattice_points: usize) -> Result<GapReport> {
    let mut report = GapReport {
        factor_two_holds: true,
        exact_region_holds: true,
        padded_corner_bound_holds: true,
        ..Default::default()
    };
    let two = Rational::from_integer(2);
    for params in grid {
        let vu = corner_points(SchemeKind::VirtualUser, params);
        let mds = corner_points(SchemeKind::Mds, params);
        let threshold = exact_optimality_threshold(params);
        let half = int(params.files) / 2;
        for m in memory_lattice(params.files, lattice_points) {
            let rv = vu.eval(m)?;
            let rm = mds.eval(m)?;
            let conv = converse_cut(params, m)?;
            if m >= half && (rv > two * conv || rm > two * conv) {
                report.factor_two_holds = false;
                report
                    .violations
                    .push(format!("factor two at {params:?} M={m}: Rv={rv} Rm={rm} bound={}", two * conv));
            }
            if m >= threshold && rm != conv {
                report.exact_region_holds = false;
                report
                    .violations
                    .push(format!("exact region at {params:?} M={m}: Rm={rm} converse={conv}"));
            }
            let ratio = |a: Rational| (!conv.is_zero()).then(|| (a / conv).to_f64().unwrap_or(f64::NAN));
            report.points.push(GapPoint {
                users: params.users,
                files: params.files,
                demands_per_user: params.demands_per_user,
                memory: m.to_string(),
                virtual_user: rv.to_string(),
                mds: rm.to_string(),
                converse: conv.to_string(),
                ratio_virtual_user: ratio(rv),
                ratio_mds: ratio(rm),
                table_factor: table_factor(params, m),
            });
        }
        for (t_prime, rv, bound) in padded_corner_checks(params) {
            if rv > bound {
                report.padded_corner_bound_holds = false;
                report
                    .violations
                    .push(format!("padded corner at {params:?} t'={t_prime}: {rv} > {bound}"));
            }
        }
    }
    Ok(report)
}

/// For each `t'` in `1..=K`: the virtual-user load at `t = C(N,L) t'` and
/// the bound `2L(K-t')/(t'+1)`.
pub fn padded_corner_checks(params: &SystemParams) -> Vec<(usize, Rational, Rational)> {
    let per_demand = binom(params.files as i64, params.demands_per_user as i64);
    let k = params.users as i128;
    let l = params.demands_per_user as i128;
    (1..=params.users)
        .map(|tp| {
            let (_, rv) = virtual_user_corner(params, per_demand * tp as u128);
            let bound = r(2 * l * (k - tp as i128), tp as i128 + 1);
            (tp, rv, bound)
        })
        .collect()
}
