//! Nucleotide allocation across subbands.
//!
//! Each subband contributes a list of operational rate-distortion points,
//! one per candidate step size. [`lagrangian`] picks, for a multiplier λ,
//! the point minimizing `D + λR` on every subband's lower convex hull and
//! searches λ over the hull breakpoints for the largest total rate within
//! budget. [`allocate`] starts from that solution and then spends whatever
//! budget the hull could not reach: exactly (dynamic programming over the
//! rate lattice) when the lattice is small enough, greedily otherwise.

use rayon::prelude::*;

use crate::dna_code::{codeword_length, codeword_length_strict};
use crate::quantize::{check_step, level_range, raw_level};
use crate::transform::SubbandSet;
use crate::{Error, Result, Scalar};

/// Upper bound on `subbands x options x rate-units` for the exact pass.
const EXACT_WORK_LIMIT: u128 = 60_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint<T> {
    pub q: T,
    /// Quantization levels used at this step.
    pub k: u32,
    /// Codeword length for `k` levels.
    pub l: usize,
    /// Weighted squared error: subband weight times the sum of squared
    /// quantization errors.
    pub distortion: T,
    /// Payload nucleotides: coefficient count times `l`.
    pub rate_nts: u64,
}

/// R-D points per subband, in subband order.
pub type RdTable<T> = Vec<Vec<RdPoint<T>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult<T> {
    /// Chosen position in each subband's point list.
    pub choices: Vec<usize>,
    /// Chosen step per subband.
    pub steps: Vec<T>,
    pub rate_nts: u64,
    pub distortion: T,
    /// Multiplier of the Lagrangian stage.
    pub lambda: T,
}

/// The default candidate steps: powers of two from 1 to 256.
pub fn default_q_grid<T: Scalar>() -> Vec<T> {
    (0..=8).map(|e| T::lit((1u32 << e) as f64)).collect()
}

/// One R-D point, measured by quantizing and dequantizing `coeffs`.
pub fn measure_point<T: Scalar>(coeffs: &[T], q: T, weight: T, strict: bool) -> Result<RdPoint<T>> {
    check_step(q)?;
    let (lo, hi) = if coeffs.is_empty() { (0, 0) } else { level_range(coeffs, q) };
    let k = (hi - lo + 1) as u64;
    let l = if strict { codeword_length_strict(k)? } else { codeword_length(k)? };
    let sse: T = coeffs
        .iter()
        .map(|&x| {
            let e = x - T::lit(raw_level(x, q) as f64) * q;
            e * e
        })
        .sum();
    Ok(RdPoint {
        q,
        k: u32::try_from(k).map_err(|_| Error::InvalidStep(q.as_f64()))?,
        l,
        distortion: weight * sse,
        rate_nts: coeffs.len() as u64 * l as u64,
    })
}

/// R-D points for every subband and every step in `q_grid`. `weights` is in
/// subband order.
pub fn build_rd_points<T: Scalar>(
    set: &SubbandSet<T>,
    q_grid: &[T],
    weights: &[T],
    strict: bool,
) -> Result<Vec<Vec<RdPoint<T>>>> {
    if q_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if weights.len() != set.subbands.len() {
        return Err(Error::GeometryMismatch(format!(
            "{} weights for {} subbands",
            weights.len(),
            set.subbands.len()
        )));
    }
    set.subbands
        .par_iter()
        .zip(weights.par_iter())
        .map(|(band, &w)| {
            q_grid.par_iter().map(|&q| measure_point(&band.coeffs, q, w, strict)).collect()
        })
        .collect()
}

/// Indices of the Pareto front (strictly decreasing distortion with
/// increasing rate), in rate order.
fn pareto_front<T: Scalar>(points: &[RdPoint<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .rate_nts
            .cmp(&points[b].rate_nts)
            .then(points[a].distortion.partial_cmp(&points[b].distortion).unwrap())
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        match front.last() {
            Some(&j) if points[j].rate_nts == points[i].rate_nts => {}
            Some(&j) if points[i].distortion >= points[j].distortion => {}
            _ => front.push(i),
        }
    }
    front
}

/// Lower convex hull of the Pareto front, in rate order.
fn lower_hull<T: Scalar>(points: &[RdPoint<T>]) -> Vec<usize> {
    let front = pareto_front(points);
    let mut hull: Vec<usize> = Vec::with_capacity(front.len());
    for i in front {
        while hull.len() >= 2 {
            let (a, b) = (&points[hull[hull.len() - 2]], &points[hull[hull.len() - 1]]);
            let c = &points[i];
            // drop b if it lies on or above the chord a-c
            let cross = (T::lit((b.rate_nts - a.rate_nts) as f64)) * (c.distortion - a.distortion)
                - (T::lit((c.rate_nts - a.rate_nts) as f64)) * (b.distortion - a.distortion);
            if cross <= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn check_lists<T>(points: &[Vec<RdPoint<T>>]) -> Result<()> {
    if points.iter().any(Vec::is_empty) {
        return Err(Error::EmptyGrid);
    }
    Ok(())
}

fn minimum_rate<T>(points: &[Vec<RdPoint<T>>]) -> u64 {
    points.iter().map(|p| p.iter().map(|x| x.rate_nts).min().unwrap_or(0)).sum()
}

fn summarize<T: Scalar>(points: &[Vec<RdPoint<T>>], choices: Vec<usize>, lambda: T) -> AllocationResult<T> {
    let picked = || points.iter().zip(&choices).map(|(p, &c)| &p[c]);
    AllocationResult {
        steps: picked().map(|p| p.q).collect(),
        rate_nts: picked().map(|p| p.rate_nts).sum(),
        distortion: picked().map(|p| p.distortion).sum(),
        choices,
        lambda,
    }
}

/// Pure Lagrangian allocation on the lower convex hulls: the largest
/// hull-achievable total rate that fits `budget_nts`. At equal cost the
/// lower rate wins.
pub fn lagrangian<T: Scalar>(points: &[Vec<RdPoint<T>>], budget_nts: u64) -> Result<AllocationResult<T>> {
    check_lists(points)?;
    let minimum = minimum_rate(points);
    if budget_nts < minimum {
        return Err(Error::InfeasibleBudget { budget: budget_nts, minimum });
    }
    let hulls: Vec<Vec<usize>> = points.iter().map(|p| lower_hull(p)).collect();

    // Hull segments as (slope, subband). Slopes along one hull strictly
    // decrease, so taking segments in global slope order keeps every
    // subband's choice on its hull.
    let mut segments: Vec<(T, usize, u64)> = Vec::new();
    for (b, hull) in hulls.iter().enumerate() {
        for w in hull.windows(2) {
            let (lo, hi) = (&points[b][w[0]], &points[b][w[1]]);
            let dr = hi.rate_nts - lo.rate_nts;
            segments.push(((lo.distortion - hi.distortion) / T::lit(dr as f64), b, dr));
        }
    }
    segments.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut level = vec![0usize; points.len()];
    let mut rate = minimum;
    let mut lambda = segments.first().map_or(T::zero(), |s| s.0 + T::one());
    let mut start = 0;
    while start < segments.len() {
        // all segments of equal slope switch together
        let slope = segments[start].0;
        let end = segments[start..].iter().position(|s| s.0 != slope).map_or(segments.len(), |p| start + p);
        let extra: u64 = segments[start..end].iter().map(|s| s.2).sum();
        if rate + extra > budget_nts {
            lambda = slope;
            break;
        }
        rate += extra;
        for s in &segments[start..end] {
            level[s.1] += 1;
        }
        lambda = if end < segments.len() { segments[end].0 } else { T::zero() };
        start = end;
    }
    let choices = hulls.iter().zip(&level).map(|(h, &lv)| h[lv]).collect();
    Ok(summarize(points, choices, lambda))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact minimum-distortion choice under the budget, by dynamic programming
/// over rate in units of the gcd of all rates. `None` when the table would
/// be too large.
fn exact<T: Scalar>(points: &[Vec<RdPoint<T>>], budget_nts: u64) -> Option<Vec<usize>> {
    let fronts: Vec<Vec<usize>> = points.iter().map(|p| pareto_front(p)).collect();
    let unit = points.iter().flatten().map(|p| p.rate_nts).fold(0, gcd).max(1);
    let cap = (budget_nts / unit) as usize;
    let options: u128 = fronts.iter().map(|f| f.len() as u128).sum();
    if options * (cap as u128 + 1) > EXACT_WORK_LIMIT {
        return None;
    }
    let inf = T::infinity();
    // best[r]: least distortion at exactly r units
    let mut best = vec![inf; cap + 1];
    best[0] = T::zero();
    let mut picks: Vec<Vec<u16>> = Vec::with_capacity(fronts.len());
    for (b, front) in fronts.iter().enumerate() {
        let mut next = vec![inf; cap + 1];
        let mut pick = vec![u16::MAX; cap + 1];
        for (o, &i) in front.iter().enumerate() {
            let p = &points[b][i];
            let du = (p.rate_nts / unit) as usize;
            if du > cap {
                continue;
            }
            for r in 0..=cap - du {
                if best[r] == inf {
                    continue;
                }
                let d = best[r] + p.distortion;
                if d < next[r + du] {
                    next[r + du] = d;
                    pick[r + du] = o as u16;
                }
            }
        }
        best = next;
        picks.push(pick);
    }
    // least distortion, then least rate
    let mut end = None;
    for r in 0..=cap {
        if best[r] == inf {
            continue;
        }
        if end.is_none_or(|e: usize| best[r] < best[e]) {
            end = Some(r);
        }
    }
    let mut r = end?;
    let mut choices = vec![0; fronts.len()];
    for b in (0..fronts.len()).rev() {
        let o = picks[b][r] as usize;
        let i = fronts[b][o];
        choices[b] = i;
        r -= (points[b][i].rate_nts / unit) as usize;
    }
    Some(choices)
}

/// Spends leftover budget on the best distortion-per-nucleotide upgrades
/// that still fit.
fn greedy_fill<T: Scalar>(points: &[Vec<RdPoint<T>>], mut choices: Vec<usize>, budget_nts: u64) -> Vec<usize> {
    let fronts: Vec<Vec<usize>> = points.iter().map(|p| pareto_front(p)).collect();
    let mut rate: u64 = points.iter().zip(&choices).map(|(p, &c)| p[c].rate_nts).sum();
    loop {
        let mut best: Option<(T, usize, usize)> = None;
        for (b, front) in fronts.iter().enumerate() {
            let cur = &points[b][choices[b]];
            for &i in front {
                let p = &points[b][i];
                if p.rate_nts <= cur.rate_nts || p.distortion >= cur.distortion {
                    continue;
                }
                let dr = p.rate_nts - cur.rate_nts;
                if rate + dr > budget_nts {
                    continue;
                }
                let gain = (cur.distortion - p.distortion) / T::lit(dr as f64);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, b, i));
                }
            }
        }
        let Some((_, b, i)) = best else { break };
        rate = rate - points[b][choices[b]].rate_nts + points[b][i].rate_nts;
        choices[b] = i;
    }
    choices
}

/// Minimum-distortion allocation within `budget_nts`.
pub fn allocate<T: Scalar>(points: &[Vec<RdPoint<T>>], budget_nts: u64) -> Result<AllocationResult<T>> {
    let base = lagrangian(points, budget_nts)?;
    let choices = match exact(points, budget_nts) {
        Some(c) => c,
        None => greedy_fill(points, base.choices.clone(), budget_nts),
    };
    let refined = summarize(points, choices, base.lambda);
    // the refinement can only improve on the hull solution
    if refined.distortion <= base.distortion {
        Ok(refined)
    } else {
        Ok(base)
    }
}

/// Allocation with an adaptive step grid: starts from [`default_q_grid`] and,
/// for `rounds` passes, adds midpoints between each subband's chosen step
/// and its grid neighbours (halving or doubling at the grid ends).
pub fn allocate_refined<T: Scalar>(
    set: &SubbandSet<T>,
    weights: &[T],
    budget_nts: u64,
    strict: bool,
    rounds: usize,
) -> Result<(RdTable<T>, AllocationResult<T>)> {
    let mut points = build_rd_points(set, &default_q_grid(), weights, strict)?;
    let mut result = allocate(&points, budget_nts)?;
    for _ in 0..rounds {
        let additions: Vec<Vec<T>> = points
            .iter()
            .zip(&result.choices)
            .map(|(pts, &c)| {
                let mut qs: Vec<T> = pts.iter().map(|p| p.q).collect();
                qs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let q = pts[c].q;
                let pos = qs.iter().position(|&x| x == q).unwrap();
                let two = T::lit(2.0);
                let below = if pos > 0 { (qs[pos - 1] + q) / two } else { q / two };
                let above = if pos + 1 < qs.len() { (qs[pos + 1] + q) / two } else { q * two };
                [below, above].into_iter().filter(|v| !qs.contains(v)).collect()
            })
            .collect();
        if additions.iter().all(Vec::is_empty) {
            break;
        }
        let new: Vec<Vec<RdPoint<T>>> = set
            .subbands
            .par_iter()
            .zip(weights.par_iter())
            .zip(additions.par_iter())
            .map(|((band, &w), qs)| qs.iter().map(|&q| measure_point(&band.coeffs, q, w, strict)).collect())
            .collect::<Result<_>>()?;
        for (pts, extra) in points.iter_mut().zip(new) {
            pts.extend(extra);
        }
        result = allocate(&points, budget_nts)?;
    }
    Ok((points, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(rate: u64, d: f64) -> RdPoint<f64> {
        RdPoint { q: d + 1.0, k: 1, l: 1, distortion: d, rate_nts: rate }
    }

    #[test]
    fn unconstrained_takes_finest() {
        let pts = vec![
            vec![pt(10, 5.0), pt(20, 2.0), pt(30, 1.0)],
            vec![pt(5, 9.0), pt(15, 3.0)],
        ];
        let r = allocate(&pts, 1000).unwrap();
        assert_eq!(r.choices, vec![2, 1]);
        assert_eq!(r.rate_nts, 45);
        let r = lagrangian(&pts, 1000).unwrap();
        assert_eq!(r.choices, vec![2, 1]);
    }

    #[test]
    fn single_subband_best_under_budget() {
        let pts = vec![vec![pt(10, 5.0), pt(20, 2.0), pt(30, 1.9), pt(40, 0.5)]];
        let r = allocate(&pts, 35).unwrap();
        assert_eq!(r.choices, vec![2]);
        let r = allocate(&pts, 25).unwrap();
        assert_eq!(r.choices, vec![1]);
    }

    #[test]
    fn infeasible_and_empty() {
        let pts = vec![vec![pt(10, 1.0)], vec![pt(10, 1.0)]];
        assert!(matches!(allocate(&pts, 19), Err(Error::InfeasibleBudget { budget: 19, minimum: 20 })));
        let empty: Vec<Vec<RdPoint<f64>>> = vec![vec![]];
        assert!(matches!(allocate(&empty, 19), Err(Error::EmptyGrid)));
    }

    #[test]
    fn hull_drops_non_convex_points() {
        let pts = [pt(10, 10.0), pt(20, 9.0), pt(30, 1.0), pt(25, 12.0)];
        assert_eq!(lower_hull(&pts), vec![0, 2]);
        assert_eq!(pareto_front(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn equal_cost_prefers_lower_rate() {
        // both subbands have identical slope 1; budget allows only one step
        let pts = vec![vec![pt(0, 10.0), pt(10, 0.0)], vec![pt(0, 10.0), pt(10, 0.0)]];
        let r = lagrangian(&pts, 15).unwrap();
        assert_eq!(r.rate_nts, 0);
        let r = allocate(&pts, 15).unwrap();
        assert_eq!(r.rate_nts, 10);
        assert_eq!(r.distortion, 10.0);
    }

    #[test]
    fn greedy_fill_respects_budget() {
        let pts = vec![
            vec![pt(10, 50.0), pt(20, 30.0), pt(35, 10.0)],
            vec![pt(10, 40.0), pt(13, 39.0), pt(30, 0.0)],
        ];
        let start = vec![0, 0];
        let c = greedy_fill(&pts, start, 40);
        let rate: u64 = pts.iter().zip(&c).map(|(p, &i)| p[i].rate_nts).sum();
        assert_eq!(rate, 33);
        assert_eq!(c, vec![1, 1]);
    }
}
