//! Mixed-integer schedule search.
//!
//! A subframe plan has three coupled decisions: how many whole blocks `h`
//! the sensing window covers, how far `T_r` it reaches into the next block,
//! and how the remaining `N_t = N - h` data blocks are split into `M`
//! small-scale update intervals. The search is exact over the two integer
//! axes and one-dimensional over `T_r`: for every `(h, M)` the block split
//! is the near-equal [`allocate_blocks`] partition (exhaustively verified
//! optimal for small frames by [`best_composition`]) and the continuous
//! leftover is maximized by a grid-safeguarded golden-section pass. Three
//! reference policies ([`BaselineKind`]) and a dense-grid
//! [`brute_force`] oracle share the same machinery.

use crate::numerics::{maximize_unimodal_1d, RngStream};
use crate::rate::{frame_rate, FramePlan, SubframeEvaluator, SystemModel};
use crate::sensing::{min_sensing_time, MinSensingTime, UserLargeScale};
use crate::{Error, Result};

/// One evaluated outer grid point `(h, M)` with its best leftover and rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Whole blocks consumed by sensing.
    pub h: u32,
    /// Number of small-scale updates.
    pub m: u32,
    /// Best sensing leftover into the partial block, in `[0, T_b)`.
    pub t_r: f64,
    /// Fast-path rate at that point.
    pub rate: f64,
}

/// Outcome of a schedule search.
///
/// `rate` is the winning plan re-evaluated through the reference route
/// ([`frame_rate`]), so it is reproducible without the search's memo state.
/// `trace` holds one row per outer grid point the search evaluated, in
/// visit order (`h` ascending, then `M` ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// The winning plan.
    pub plan: FramePlan,
    /// Reference-route rate of `plan`.
    pub rate: f64,
    /// Per-`(h, M)` search trace.
    pub trace: Vec<TracePoint>,
}

/// Reference scheduling policies the proposed search is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Single small-scale update: `M = 1`, sensing duration still optimized.
    Ssu,
    /// Full small-scale updating: one update per data block (`M = N - h`).
    Fsu,
    /// Random block allocation: optimized `h, M, T_r` but a uniformly random
    /// composition instead of the near-equal split, averaged over
    /// [`RBA_DRAWS`] seeded draws.
    Rba,
}

/// Number of seeded draws behind the random-allocation baseline.
pub const RBA_DRAWS: usize = 50;

/// Substream index offset reserved for the random-allocation baseline, so
/// its draws never collide with other consumers of the same master seed.
const RBA_STREAM_BASE: u64 = 1 << 32;

/// Detailed outcome of the random-allocation baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RbaReport {
    /// Rate achieved by each seeded draw, indexed by substream number.
    pub per_seed: Vec<f64>,
    /// Mean of `per_seed` — the rate the baseline reports.
    pub mean: f64,
    /// The best draw's plan with its reference-route rate (empty trace).
    pub best: SearchResult,
}

/// Splits `n_t` data blocks into `m` update intervals as evenly as
/// possible: the first `n_t mod m` intervals get `floor(n_t / m) + 1`
/// blocks, the rest get `floor(n_t / m)`.
pub fn allocate_blocks(n_t: u32, m: u32) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(Error::Argument("at least one update is required".into()));
    }
    if m > n_t {
        return Err(Error::Argument(format!(
            "cannot schedule {m} updates over {n_t} data blocks"
        )));
    }
    let q = n_t / m;
    let r = (n_t % m) as usize;
    let mut out = vec![q; m as usize];
    for slot in out.iter_mut().take(r) {
        *slot += 1;
    }
    Ok(out)
}

/// Best leftover duration within one `(h, M)` segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerBest {
    /// Argmax leftover in `[0, T_b)`.
    pub t_r: f64,
    /// The corresponding sensing duration `h T_b + t_r`, clamped up to the
    /// minimum feasible duration when rounding would land a hair below it.
    pub t_l: f64,
    /// Fast-path rate at the argmax.
    pub rate: f64,
}

/// Shared per-segment continuous search over the sensing leftover, for an
/// explicit blocks-per-update list.
///
/// Returns `Ok(None)` when the segment contains no feasible duration
/// (`t_min >= (h + 1) T_b`). The lower endpoint is
/// `max(0, t_min - h T_b)`; the upper endpoint sits just below `T_b` so the
/// split into whole blocks stays at `h`. The endpoint `T_r = 0`, where the
/// partial-block overhead vanishes discontinuously, is always evaluated
/// exactly when feasible because the maximizer probes both interval ends.
fn inner_search(
    evaluator: &SubframeEvaluator,
    t_min: f64,
    h: u32,
    n_m: &[u32],
) -> Result<Option<InnerBest>> {
    let frame = &evaluator.system().frame;
    let t_b = frame.t_b;
    let blocks: u32 = n_m.iter().sum();
    if h + blocks != frame.n_blocks {
        return Err(Error::Argument(format!(
            "{h} sensing blocks plus {blocks} data blocks do not fill the {}-block subframe",
            frame.n_blocks
        )));
    }
    let seg_start = h as f64 * t_b;
    let lo = (t_min - seg_start).max(0.0);
    if lo >= t_b {
        return Ok(None);
    }
    let hi = (t_b * (1.0 - 1e-9)).max(lo);

    let mut stashed: Option<Error> = None;
    let objective = |t_r: f64| -> f64 {
        let plan = FramePlan {
            // `max` repairs the float case where `seg_start + lo` rounds a
            // last-place unit below the bisected feasibility threshold.
            t_l: (seg_start + t_r).max(t_min),
            n_m: n_m.to_vec(),
        };
        match evaluator.evaluate(&plan) {
            Ok(rate) => rate,
            Err(e) => {
                if stashed.is_none() {
                    stashed = Some(e);
                }
                f64::NEG_INFINITY
            }
        }
    };
    let (t_r, rate) = maximize_unimodal_1d(objective, lo, hi, 1e-4 * t_b)?;
    if let Some(e) = stashed {
        return Err(e);
    }
    Ok(Some(InnerBest {
        t_r,
        t_l: (seg_start + t_r).max(t_min),
        rate,
    }))
}

/// Optimizes the sensing leftover for fixed `(h, M)` with the near-equal
/// block split, given the minimum feasible sensing duration `t_min`.
///
/// `Ok(None)` signals an empty feasible interval (callers skip the
/// segment). The maximizer's dense-grid guarantee applies: the returned
/// rate is never below the segment's 1000-point uniform grid maximum.
pub fn optimize_inner(
    evaluator: &SubframeEvaluator,
    t_min: f64,
    h: u32,
    m: u32,
) -> Result<Option<InnerBest>> {
    let n = evaluator.system().frame.n_blocks;
    if h >= n {
        return Err(Error::Argument(format!(
            "{h} sensing blocks leave no data in a {n}-block subframe"
        )));
    }
    let n_m = allocate_blocks(n - h, m)?;
    inner_search(evaluator, t_min, h, &n_m)
}

fn system_min_time(system: &SystemModel, gammas: &[f64]) -> Result<MinSensingTime> {
    let larges: Vec<UserLargeScale> = system.users.iter().map(|u| u.large.clone()).collect();
    let budget = system.frame.n_blocks as f64 * system.frame.t_b;
    min_sensing_time(&larges, gammas, budget)
}

/// First block index whose segment can contain `t_min`, plus the
/// infeasibility check for budgets consumed entirely by sensing.
fn sensing_floor(t_min: &MinSensingTime, system: &SystemModel) -> Result<u32> {
    let n = system.frame.n_blocks;
    let h_min = (t_min.time / system.frame.t_b).floor() as u32;
    if h_min >= n {
        return Err(Error::InfeasibleSensing {
            user: t_min.binding_user,
            t_min: t_min.time,
            budget: n as f64 * system.frame.t_b,
        });
    }
    Ok(h_min)
}

struct Winner {
    h: u32,
    m: u32,
    inner: InnerBest,
}

/// Generic outer loop: visits every feasible `(h, M)` with `M` drawn from
/// `m_range(n_t)`, records a trace row per visited point, and keeps the
/// best by strict improvement (so ties resolve toward smaller `h`, then
/// smaller `M`, then the smaller leftover preferred by the inner search).
fn outer_search(
    evaluator: &SubframeEvaluator,
    t_min: &MinSensingTime,
    m_range: impl Fn(u32) -> std::ops::RangeInclusive<u32>,
) -> Result<(Winner, Vec<TracePoint>)> {
    let system = evaluator.system();
    let n = system.frame.n_blocks;
    let h_min = sensing_floor(t_min, system)?;
    let mut trace = Vec::new();
    let mut winner: Option<Winner> = None;
    for h in h_min..n {
        let n_t = n - h;
        for m in m_range(n_t) {
            let Some(inner) = optimize_inner(evaluator, t_min.time, h, m)? else {
                continue;
            };
            trace.push(TracePoint {
                h,
                m,
                t_r: inner.t_r,
                rate: inner.rate,
            });
            if winner.as_ref().is_none_or(|w| inner.rate > w.inner.rate) {
                winner = Some(Winner { h, m, inner });
            }
        }
    }
    let winner = winner.ok_or(Error::InfeasibleSensing {
        user: t_min.binding_user,
        t_min: t_min.time,
        budget: n as f64 * system.frame.t_b,
    })?;
    Ok((winner, trace))
}

fn finish(
    evaluator: &SubframeEvaluator,
    winner: Winner,
    trace: Vec<TracePoint>,
) -> Result<SearchResult> {
    let n = evaluator.system().frame.n_blocks;
    let plan = FramePlan {
        t_l: winner.inner.t_l,
        n_m: allocate_blocks(n - winner.h, winner.m)?,
    };
    let report = frame_rate(&plan, evaluator.system())?;
    Ok(SearchResult {
        plan,
        rate: report.total_rate,
        trace,
    })
}

/// Exact search over `h` and `M` with the near-equal block split:
/// `h` ranges from `floor(t_min / T_b)` to `N - 1`, `M` from 1 to `N - h`.
///
/// Errors with [`Error::InfeasibleSensing`] when even the whole subframe
/// cannot meet the sensing requirement.
pub fn optimize(system: &SystemModel, gammas: &[f64]) -> Result<SearchResult> {
    let evaluator = SubframeEvaluator::new(system.clone())?;
    optimize_with(&evaluator, gammas)
}

/// [`optimize`] against a caller-provided evaluator, sharing its memo.
pub fn optimize_with(evaluator: &SubframeEvaluator, gammas: &[f64]) -> Result<SearchResult> {
    let t_min = system_min_time(evaluator.system(), gammas)?;
    let (winner, trace) = outer_search(evaluator, &t_min, |n_t| 1..=n_t)?;
    finish(evaluator, winner, trace)
}

/// Evaluates one reference policy. The random-allocation baseline reports
/// its mean rate over [`RBA_DRAWS`] draws together with the best draw's
/// plan; see [`baseline_rba_with`] for the per-draw detail.
pub fn baseline(
    system: &SystemModel,
    gammas: &[f64],
    kind: BaselineKind,
    rng: &mut RngStream,
) -> Result<SearchResult> {
    let evaluator = SubframeEvaluator::new(system.clone())?;
    baseline_with(&evaluator, gammas, kind, rng)
}

/// [`baseline`] against a caller-provided evaluator, sharing its memo.
pub fn baseline_with(
    evaluator: &SubframeEvaluator,
    gammas: &[f64],
    kind: BaselineKind,
    rng: &mut RngStream,
) -> Result<SearchResult> {
    let t_min = system_min_time(evaluator.system(), gammas)?;
    match kind {
        BaselineKind::Ssu => {
            let (winner, trace) = outer_search(evaluator, &t_min, |_| 1..=1)?;
            finish(evaluator, winner, trace)
        }
        BaselineKind::Fsu => {
            let (winner, trace) = outer_search(evaluator, &t_min, |n_t| n_t..=n_t)?;
            finish(evaluator, winner, trace)
        }
        BaselineKind::Rba => {
            let report = baseline_rba_with(evaluator, gammas, rng)?;
            Ok(SearchResult {
                plan: report.best.plan,
                rate: report.mean,
                trace: Vec::new(),
            })
        }
    }
}

/// Uniformly random composition of `n_t` blocks into `m` positive parts,
/// drawn by sorting `m - 1` distinct cut points.
fn random_composition(n_t: u32, m: u32, rng: &mut RngStream) -> Vec<u32> {
    debug_assert!(m >= 1 && m <= n_t);
    let mut cuts: Vec<u32> = (1..n_t).collect();
    let picks = (m - 1) as usize;
    for i in 0..picks {
        let j = i + rng.uniform_below((cuts.len() - i) as u64) as usize;
        cuts.swap(i, j);
    }
    let mut chosen: Vec<u32> = cuts[..picks].to_vec();
    chosen.sort_unstable();
    chosen.push(n_t);
    let mut out = Vec::with_capacity(m as usize);
    let mut prev = 0;
    for c in chosen {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Random-allocation baseline: for every seeded draw, runs the full
/// `(h, M, T_r)` search but with a fresh uniformly random composition in
/// place of the near-equal split at each `(h, M)`, and reports the mean of
/// the per-draw optima.
///
/// Draw `i` uses the substream `RBA_STREAM_BASE + i` of `rng`'s master
/// seed, so results depend only on the seed, never on call order.
pub fn baseline_rba_with(
    evaluator: &SubframeEvaluator,
    gammas: &[f64],
    rng: &mut RngStream,
) -> Result<RbaReport> {
    let system = evaluator.system();
    let t_min = system_min_time(system, gammas)?;
    let n = system.frame.n_blocks;
    let h_min = sensing_floor(&t_min, system)?;
    let mut per_seed = Vec::with_capacity(RBA_DRAWS);
    let mut best: Option<(f64, FramePlan)> = None;
    for draw in 0..RBA_DRAWS {
        let mut draw_rng = rng.substream(RBA_STREAM_BASE + draw as u64);
        let mut draw_best: Option<(f64, FramePlan)> = None;
        for h in h_min..n {
            let n_t = n - h;
            for m in 1..=n_t {
                let n_m = random_composition(n_t, m, &mut draw_rng);
                let Some(inner) = inner_search(evaluator, t_min.time, h, &n_m)? else {
                    continue;
                };
                if draw_best.as_ref().is_none_or(|(r, _)| inner.rate > *r) {
                    draw_best = Some((
                        inner.rate,
                        FramePlan {
                            t_l: inner.t_l,
                            n_m,
                        },
                    ));
                }
            }
        }
        let (rate, plan) = draw_best.ok_or(Error::InfeasibleSensing {
            user: t_min.binding_user,
            t_min: t_min.time,
            budget: n as f64 * system.frame.t_b,
        })?;
        per_seed.push(rate);
        if best.as_ref().is_none_or(|(r, _)| rate > *r) {
            best = Some((rate, plan));
        }
    }
    let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    let (_, plan) = best.expect("RBA_DRAWS >= 1");
    let rate = frame_rate(&plan, system)?.total_rate;
    Ok(RbaReport {
        per_seed,
        mean,
        best: SearchResult {
            plan,
            rate,
            trace: Vec::new(),
        },
    })
}

/// Dense-grid oracle: evaluates every `(h, M)` with the near-equal split on
/// an inclusive `grid_points`-point uniform grid over the leftover interval
/// (the same grid formula the safeguarded maximizer uses internally).
/// Refuses subframes longer than 40 blocks.
pub fn brute_force(
    system: &SystemModel,
    gammas: &[f64],
    grid_points: usize,
) -> Result<SearchResult> {
    let n = system.frame.n_blocks;
    if n > 40 {
        return Err(Error::Refusal(format!(
            "dense-grid search over a {n}-block subframe is too expensive; 40 blocks is the limit"
        )));
    }
    if grid_points < 2 {
        return Err(Error::Argument(format!(
            "at least 2 grid points are required, got {grid_points}"
        )));
    }
    let evaluator = SubframeEvaluator::new(system.clone())?;
    let t_min = system_min_time(system, gammas)?;
    let h_min = sensing_floor(&t_min, system)?;
    let t_b = system.frame.t_b;
    let mut trace = Vec::new();
    let mut winner: Option<Winner> = None;
    for h in h_min..n {
        let n_t = n - h;
        let seg_start = h as f64 * t_b;
        let lo = (t_min.time - seg_start).max(0.0);
        if lo >= t_b {
            continue;
        }
        let hi = (t_b * (1.0 - 1e-9)).max(lo);
        let step = (hi - lo) / (grid_points - 1) as f64;
        for m in 1..=n_t {
            let n_m = allocate_blocks(n_t, m)?;
            let mut seg_best: Option<InnerBest> = None;
            for i in 0..grid_points {
                let t_r = if i + 1 == grid_points {
                    hi
                } else {
                    lo + step * i as f64
                };
                let t_l = (seg_start + t_r).max(t_min.time);
                let rate = evaluator.evaluate(&FramePlan {
                    t_l,
                    n_m: n_m.clone(),
                })?;
                if seg_best.as_ref().is_none_or(|b| rate > b.rate) {
                    seg_best = Some(InnerBest { t_r, t_l, rate });
                }
            }
            let inner = seg_best.expect("grid_points >= 2");
            trace.push(TracePoint {
                h,
                m,
                t_r: inner.t_r,
                rate: inner.rate,
            });
            if winner.as_ref().is_none_or(|w| inner.rate > w.inner.rate) {
                winner = Some(Winner { h, m, inner });
            }
        }
    }
    let winner = winner.ok_or(Error::InfeasibleSensing {
        user: t_min.binding_user,
        t_min: t_min.time,
        budget: n as f64 * t_b,
    })?;
    finish(&evaluator, winner, trace)
}

/// Exhaustive composition check at a fixed sensing duration: enumerates
/// every ordered split of `n_t` data blocks into `m` positive parts
/// (`h = N - n_t` is implied) and returns the first maximizing composition
/// with its rate. Refuses `n_t > 12` (up to 2^11 plans per pair).
pub fn best_composition(
    evaluator: &SubframeEvaluator,
    t_l: f64,
    n_t: u32,
    m: u32,
) -> Result<(Vec<u32>, f64)> {
    if n_t > 12 {
        return Err(Error::Refusal(format!(
            "enumerating all compositions of {n_t} blocks is too expensive; 12 is the limit"
        )));
    }
    if m == 0 || m > n_t {
        return Err(Error::Argument(format!(
            "cannot split {n_t} blocks into {m} parts"
        )));
    }
    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut composition = vec![0u32; m as usize];
    enumerate_compositions(n_t, m as usize, 0, &mut composition, &mut |comp| {
        let rate = evaluator.evaluate(&FramePlan {
            t_l,
            n_m: comp.to_vec(),
        })?;
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((comp.to_vec(), rate));
        }
        Ok(())
    })?;
    Ok(best.expect("at least one composition exists"))
}

/// Visits every composition of `total` into `slots` positive parts in
/// lexicographic order.
fn enumerate_compositions(
    total: u32,
    slots: usize,
    index: usize,
    scratch: &mut Vec<u32>,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    let remaining_slots = (slots - index) as u32;
    if remaining_slots == 1 {
        scratch[index] = total;
        visit(scratch)?;
        return Ok(());
    }
    // Leave at least one block for each later slot.
    for value in 1..=(total - remaining_slots + 1) {
        scratch[index] = value;
        enumerate_compositions(total - value, slots, index + 1, scratch, visit)?;
    }
    Ok(())
}

/// Largest positive second difference of the per-segment objective, probed
/// on a `points`-point uniform grid per `(h, M)` pair. The grid starts a
/// hair above `T_r = 0` because the vanishing partial-block overhead makes
/// the objective discontinuous there; within the open segment the objective
/// is expected concave, so the result should be at most round-off sized.
pub fn concavity_diagnostic(system: &SystemModel, gammas: &[f64], points: usize) -> Result<f64> {
    if points < 3 {
        return Err(Error::Argument(format!(
            "at least 3 grid points are required, got {points}"
        )));
    }
    let evaluator = SubframeEvaluator::new(system.clone())?;
    let t_min = system_min_time(system, gammas)?;
    let h_min = sensing_floor(&t_min, system)?;
    let n = system.frame.n_blocks;
    let t_b = system.frame.t_b;
    let mut worst = f64::NEG_INFINITY;
    for h in h_min..n {
        let n_t = n - h;
        let seg_start = h as f64 * t_b;
        let lo = (t_min.time - seg_start).max(1e-6 * t_b);
        if lo >= t_b {
            continue;
        }
        let hi = (t_b * (1.0 - 1e-9)).max(lo);
        let step = (hi - lo) / (points - 1) as f64;
        for m in 1..=n_t {
            let n_m = allocate_blocks(n_t, m)?;
            let mut values = Vec::with_capacity(points);
            for i in 0..points {
                let t_r = if i + 1 == points {
                    hi
                } else {
                    lo + step * i as f64
                };
                values.push(evaluator.evaluate(&FramePlan {
                    t_l: (seg_start + t_r).max(t_min.time),
                    n_m: n_m.clone(),
                })?);
            }
            for w in values.windows(3) {
                worst = worst.max(w[2] - 2.0 * w[1] + w[0]);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{deg2_to_rad2, Scenario};

    fn default_setup() -> (SystemModel, Vec<f64>) {
        let s = Scenario::default();
        (s.system().unwrap(), s.gammas.clone())
    }

    #[test]
    fn near_equal_split_matches_the_worked_examples() {
        assert_eq!(allocate_blocks(10, 3).unwrap(), vec![4, 3, 3]);
        assert_eq!(allocate_blocks(7, 7).unwrap(), vec![1; 7]);
        assert_eq!(allocate_blocks(9, 1).unwrap(), vec![9]);
        assert_eq!(allocate_blocks(32, 11).unwrap(), {
            let mut v = vec![3; 10];
            v.push(2);
            v
        });
        assert!(allocate_blocks(5, 0).is_err());
        assert!(allocate_blocks(5, 6).is_err());
    }

    #[test]
    fn default_scenario_recovers_the_reference_schedule() {
        let (system, gammas) = default_setup();
        let result = optimize(&system, &gammas).unwrap();
        let (h, _) = result.plan.sensing_split(70.0);
        assert_eq!(h, 3);
        assert_eq!(result.plan.n_m.len(), 11);
        assert_eq!(result.plan.n_m, allocate_blocks(32, 11).unwrap());
        assert!(
            (result.plan.t_l - 245.0).abs() < 0.5,
            "sensing duration {}",
            result.plan.t_l
        );
        // The polished optimum sits a hair above the dense-grid readout of
        // the same schedule (grid step about 0.035 us), hence the window.
        assert!((result.rate - 9239.42).abs() < 0.05, "rate {}", result.rate);
        assert!(result.rate >= 9239.42 - 0.01);
    }

    #[test]
    fn winning_rate_is_the_reference_route_rate() {
        let (system, gammas) = default_setup();
        let result = optimize(&system, &gammas).unwrap();
        let again = frame_rate(&result.plan, &system).unwrap();
        assert_eq!(result.rate, again.total_rate);
    }

    #[test]
    fn trace_covers_every_outer_grid_point() {
        let (system, gammas) = default_setup();
        let result = optimize(&system, &gammas).unwrap();
        let n = system.frame.n_blocks;
        let h_min = 3u32; // floor(244.995 / 70)
        let expected: u32 = (h_min..n).map(|h| n - h).sum();
        assert_eq!(result.trace.len(), expected as usize);
        // Visit order: h ascending, then M ascending.
        let mut iter = result.trace.iter();
        for h in h_min..n {
            for m in 1..=(n - h) {
                let point = iter.next().unwrap();
                assert_eq!((point.h, point.m), (h, m));
            }
        }
    }

    #[test]
    fn repeated_searches_are_bit_identical() {
        let (system, gammas) = default_setup();
        let a = optimize(&system, &gammas).unwrap();
        let b = optimize(&system, &gammas).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inner_search_respects_the_feasibility_floor() {
        let (system, gammas) = default_setup();
        let evaluator = SubframeEvaluator::new(system.clone()).unwrap();
        let t_min = system_min_time(&system, &gammas).unwrap().time;

        // h = 3: the floor cuts into the segment.
        let inner = optimize_inner(&evaluator, t_min, 3, 11).unwrap().unwrap();
        let lo = t_min - 210.0;
        assert!(inner.t_r >= lo - 1e-9, "t_r {} below floor {lo}", inner.t_r);
        assert!(inner.t_l >= t_min);

        // h = 2: the whole segment lies below the floor.
        assert!(optimize_inner(&evaluator, t_min, 2, 5).unwrap().is_none());

        // Bad update counts are arguments errors, not silent skips.
        assert!(optimize_inner(&evaluator, t_min, 3, 0).is_err());
        assert!(optimize_inner(&evaluator, t_min, 3, 33).is_err());
    }

    #[test]
    fn saturated_sensing_pushes_the_leftover_to_zero() {
        // Far above the feasibility floor the estimation gain has saturated
        // and the partial-block overhead dominates, so the best leftover is
        // the exactly-evaluated endpoint T_r = 0.
        let (system, gammas) = default_setup();
        let evaluator = SubframeEvaluator::new(system.clone()).unwrap();
        let t_min = system_min_time(&system, &gammas).unwrap().time;
        let inner = optimize_inner(&evaluator, t_min, 10, 5).unwrap().unwrap();
        assert_eq!(inner.t_r, 0.0);
        assert_eq!(inner.t_l, 700.0);
    }

    #[test]
    fn inner_search_matches_a_dense_grid() {
        let (system, gammas) = default_setup();
        let evaluator = SubframeEvaluator::new(system.clone()).unwrap();
        let t_min = system_min_time(&system, &gammas).unwrap().time;
        let inner = optimize_inner(&evaluator, t_min, 3, 11).unwrap().unwrap();

        let n_m = allocate_blocks(32, 11).unwrap();
        let lo = t_min - 210.0;
        let hi = 70.0 * (1.0 - 1e-9);
        let mut grid_max = f64::NEG_INFINITY;
        for i in 0..1000 {
            let t_r = if i == 999 {
                hi
            } else {
                lo + (hi - lo) / 999.0 * i as f64
            };
            let rate = evaluator
                .evaluate(&FramePlan {
                    t_l: (210.0 + t_r).max(t_min),
                    n_m: n_m.clone(),
                })
                .unwrap();
            grid_max = grid_max.max(rate);
        }
        assert!(
            inner.rate >= grid_max,
            "safeguard: {} < {grid_max}",
            inner.rate
        );
        assert!(
            inner.rate <= grid_max * (1.0 + 1e-4),
            "polish overshoot: {} vs {grid_max}",
            inner.rate
        );
    }

    #[test]
    fn impossible_accuracy_is_infeasible_and_names_the_binding_user() {
        let (system, _) = default_setup();
        let gammas = vec![deg2_to_rad2(1e-9); 5];
        match optimize(&system, &gammas) {
            Err(Error::InfeasibleSensing {
                user,
                t_min,
                budget,
            }) => {
                assert_eq!(user, 0); // widest steering curvature binds first
                assert!(t_min > budget);
            }
            other => panic!("expected InfeasibleSensing, got {other:?}"),
        }
    }

    #[test]
    fn single_update_baseline_pins_m_to_one() {
        let (system, gammas) = default_setup();
        let mut rng = RngStream::new(0, 0);
        let ssu = baseline(&system, &gammas, BaselineKind::Ssu, &mut rng).unwrap();
        assert_eq!(ssu.plan.n_m.len(), 1);
        assert!(ssu.trace.iter().all(|p| p.m == 1));
        assert!(
            (ssu.rate - 6276.3).abs() < 0.5,
            "single-update rate {}",
            ssu.rate
        );
    }

    #[test]
    fn full_update_baseline_updates_every_block() {
        let (system, gammas) = default_setup();
        let mut rng = RngStream::new(0, 0);
        let fsu = baseline(&system, &gammas, BaselineKind::Fsu, &mut rng).unwrap();
        assert!(fsu.plan.n_m.iter().all(|&nm| nm == 1));
        let (h, _) = fsu.plan.sensing_split(70.0);
        assert_eq!(fsu.plan.n_m.len() as u32, 35 - h);
        assert!(fsu.rate > 0.0);
    }

    #[test]
    fn baselines_never_beat_the_proposed_search() {
        let (system, gammas) = default_setup();
        let proposed = optimize(&system, &gammas).unwrap().rate;
        let mut rng = RngStream::new(0, 0);
        for kind in [BaselineKind::Ssu, BaselineKind::Fsu, BaselineKind::Rba] {
            let rate = baseline(&system, &gammas, kind, &mut rng).unwrap().rate;
            assert!(
                rate <= proposed * (1.0 + 1e-9),
                "{kind:?} rate {rate} exceeds proposed {proposed}"
            );
        }
    }

    #[test]
    fn random_allocation_is_seed_deterministic_and_stream_indexed() {
        let (system, gammas) = default_setup();
        let evaluator = SubframeEvaluator::new(system.clone()).unwrap();
        let mut rng = RngStream::new(0, 0);
        let a = baseline_rba_with(&evaluator, &gammas, &mut rng).unwrap();
        // A fresh rng after arbitrary consumption: draws key off the master
        // seed and the fixed substream indices, not off rng state.
        let mut consumed = RngStream::new(0, 0);
        for _ in 0..17 {
            consumed.standard_normal();
        }
        let b = baseline_rba_with(&evaluator, &gammas, &mut consumed).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_seed.len(), RBA_DRAWS);
        let mean = a.per_seed.iter().sum::<f64>() / RBA_DRAWS as f64;
        assert_eq!(a.mean, mean);
        // Different master seeds give different draws.
        let mut other = RngStream::new(1, 0);
        let c = baseline_rba_with(&evaluator, &gammas, &mut other).unwrap();
        assert_ne!(a.per_seed, c.per_seed);
    }

    #[test]
    fn random_compositions_are_valid_and_uniformish() {
        let mut rng = RngStream::new(7, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let comp = random_composition(10, 3, &mut rng);
            assert_eq!(comp.len(), 3);
            assert_eq!(comp.iter().sum::<u32>(), 10);
            assert!(comp.iter().all(|&c| c >= 1));
            seen.insert(comp);
        }
        // C(9, 2) = 36 compositions; 200 draws should cover most of them.
        assert!(seen.len() > 25, "only {} distinct compositions", seen.len());
    }

    #[test]
    fn dense_grid_oracle_agrees_with_the_search() {
        let (system, gammas) = default_setup();
        let proposed = optimize(&system, &gammas).unwrap();
        let oracle = brute_force(&system, &gammas, 1000).unwrap();
        let gap = (proposed.rate - oracle.rate).abs() / oracle.rate;
        assert!(gap <= 1e-4, "relative gap {gap}");
        assert!(proposed.rate >= oracle.rate * (1.0 - 1e-12));
        assert_eq!(oracle.plan.n_m.len(), proposed.plan.n_m.len());
    }

    #[test]
    fn oversized_problems_are_refused() {
        let (mut system, gammas) = default_setup();
        system.frame.n_blocks = 41;
        assert!(matches!(
            brute_force(&system, &gammas, 10),
            Err(Error::Refusal(_))
        ));
        let (system, _) = default_setup();
        let evaluator = SubframeEvaluator::new(system).unwrap();
        assert!(matches!(
            best_composition(&evaluator, 245.0, 13, 3),
            Err(Error::Refusal(_))
        ));
    }

    #[test]
    fn near_equal_split_is_composition_optimal_for_ten_blocks() {
        let (system, gammas) = default_setup();
        let evaluator = SubframeEvaluator::new(system.clone()).unwrap();
        let t_min = system_min_time(&system, &gammas).unwrap().time;
        // h = 25 leaves 10 data blocks; T_r = 0 keeps the duration feasible.
        let t_l = 25.0 * 70.0;
        assert!(t_l >= t_min);
        let (best, best_rate) = best_composition(&evaluator, t_l, 10, 3).unwrap();
        let mut sorted = best.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sorted, vec![4, 3, 3]);
        let near_equal = evaluator
            .evaluate(&FramePlan {
                t_l,
                n_m: allocate_blocks(10, 3).unwrap(),
            })
            .unwrap();
        assert_eq!(near_equal, best_rate); // permutations recombine identically
    }

    #[test]
    fn relaxing_accuracy_never_hurts_the_rate() {
        let (system, _) = default_setup();
        let mut prev = f64::NEG_INFINITY;
        for gamma_deg2 in [0.1, 0.3, 0.5] {
            let gammas = vec![deg2_to_rad2(gamma_deg2); 5];
            let rate = optimize(&system, &gammas).unwrap().rate;
            assert!(
                rate >= prev,
                "rate fell from {prev} to {rate} at {gamma_deg2} deg^2"
            );
            prev = rate;
        }
    }

    #[test]
    fn per_segment_objective_has_no_convex_bulge() {
        let (system, gammas) = default_setup();
        let worst = concavity_diagnostic(&system, &gammas, 100).unwrap();
        println!("largest positive second difference: {worst:.3e}");
        assert!(
            worst <= 1e-9,
            "second difference {worst} suggests a non-concave segment"
        );
    }
}
