//! Exact path functionals on piecewise-constant càdlàg paths.
//!
//! # The modulus `w'(δ; T)`
//!
//! `w'(δ; T)` is the infimum, over partitions `0 = t_0 < ... < t_n = T` whose
//! intervals other than the last are longer than `δ`, of the largest
//! oscillation of the path over one of the right-open intervals
//! `[t_{i-1}, t_i)`.
//!
//! For a path with jumps `0 < s_1 < ... < s_m < T` (values `v_0..v_m`), a
//! breakpoint `b` falls in one of the *slots*
//!
//! ```text
//! Start = 0, Open(0) = (0, s_1), At(1) = {s_1}, Open(1) = (s_1, s_2), ..., Open(m) = (s_m, T), End = T
//! ```
//!
//! and the set of values an interval `[b, b')` sees depends only on the slots
//! of `b` and `b'`: it is `v_lo..=v_hi` with `lo = index of x(b)` and
//! `hi = index of x(b'-)`. Within an open slot, an earlier breakpoint is never
//! worse for the remaining constraints, so a feasibility DP over slots only
//! carries the infimum of feasible positions per slot. The strict gap
//! constraint `b' > b + δ` gives `b' > p + δ` whether or not the predecessor
//! infimum `p` is attained, so no attainment flag is needed. `w'` itself is
//! located by binary search over the finite set of candidate levels (the
//! diameters of contiguous value ranges).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::renewal::JumpPath;
use crate::state::State;

/// Values seen on `[0, T)` and the jump times strictly inside `(0, T)`.
fn restrict(path: &JumpPath, horizon: f64) -> (Vec<f64>, Vec<&State>) {
    let mut times = vec![0.0];
    let mut values = vec![path.initial()];
    for (t, v) in path.jumps() {
        if *t >= horizon {
            break;
        }
        times.push(*t);
        values.push(v);
    }
    (times, values)
}

/// `diam[lo][hi]` for all `lo <= hi`: diameter of `{v_lo, ..., v_hi}`.
fn range_diameters(values: &[&State]) -> Vec<Vec<f64>> {
    let m = values.len();
    let mut diam = vec![vec![0.0; m]; m];
    for len in 1..m {
        for lo in 0..m - len {
            let hi = lo + len;
            let d = values[lo].distance(values[hi]);
            diam[lo][hi] = d.max(diam[lo + 1][hi]).max(diam[lo][hi - 1]);
        }
    }
    diam
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Start,
    /// Breakpoint strictly between jump `j` and jump `j + 1` (or `T`).
    Open(usize),
    /// Breakpoint exactly at jump `k`.
    At(usize),
    End,
}

struct SlotInfo {
    slot: Slot,
    /// Index of the value at the breakpoint.
    lo: usize,
    /// Index of the value just before the breakpoint.
    hi_before: usize,
}

fn slots(m: usize) -> Vec<SlotInfo> {
    // m = number of jumps in (0, T)
    let mut out = vec![SlotInfo {
        slot: Slot::Start,
        lo: 0,
        hi_before: 0,
    }];
    for j in 0..=m {
        if j >= 1 {
            out.push(SlotInfo {
                slot: Slot::At(j),
                lo: j,
                hi_before: j - 1,
            });
        }
        out.push(SlotInfo {
            slot: Slot::Open(j),
            lo: j,
            hi_before: j,
        });
    }
    out.push(SlotInfo {
        slot: Slot::End,
        lo: m,
        hi_before: m,
    });
    out
}

fn feasible(level: f64, times: &[f64], horizon: f64, delta: f64, diam: &[Vec<f64>], slots: &[SlotInfo]) -> bool {
    let m = times.len() - 1;
    let upper = |j: usize| if j < m { times[j + 1] } else { horizon };
    let mut best: Vec<Option<f64>> = vec![None; slots.len()];
    best[0] = Some(0.0);
    for a in 0..slots.len() - 1 {
        let Some(p) = best[a] else { continue };
        let lo = slots[a].lo;
        for b in a + 1..slots.len() {
            let hi = slots[b].hi_before;
            if hi < lo {
                continue;
            }
            if diam[lo][hi] > level {
                // blocks only grow with b
                break;
            }
            match slots[b].slot {
                Slot::End => return true,
                Slot::At(k) => {
                    if times[k] > p + delta {
                        best[b] = Some(best[b].map_or(times[k], |q: f64| q.min(times[k])));
                    }
                }
                Slot::Open(j) => {
                    let lower = times[j].max(p + delta);
                    if lower < upper(j) {
                        best[b] = Some(best[b].map_or(lower, |q: f64| q.min(lower)));
                    }
                }
                Slot::Start => unreachable!(),
            }
        }
    }
    false
}

/// Skorokhod modulus `w'(δ; T)` of a piecewise-constant path.
pub fn w_prime(path: &JumpPath, delta: f64, horizon: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    if !(horizon > 0.0) || horizon > path.horizon() {
        return Err(Error::invalid(
            "horizon",
            format!("must lie in (0, {}]", path.horizon()),
        ));
    }
    let (times, values) = restrict(path, horizon);
    if times.len() == 1 {
        return Ok(0.0);
    }
    let diam = range_diameters(&values);
    let mut levels: Vec<f64> = diam.iter().flat_map(|row| row.iter().copied()).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let slots = slots(times.len() - 1);
    // the largest level is always feasible with the one-interval partition
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid], &times, horizon, delta, &diam, &slots) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo])
}

/// Oscillation times `s_n`, their count `N` on `[0, T]` and the minimal gap `Δ_ρ(T)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationStats {
    /// `s_0 = 0 < s_1 < ... < s_N <= T`.
    pub s_times: Vec<f64>,
    /// `N = min{n : s_{n+1} > T}`.
    pub count: usize,
    /// `min_{1 <= n <= N} (s_n - s_{n-1})`, `+∞` when `N = 0`.
    #[serde(serialize_with = "crate::report::ser_ext")]
    pub delta_rho: f64,
}

/// `s_n = inf{t >= s_{n-1} : |ω(t) - ω(s_{n-1})| >= ρ/4}` evaluated on the jump set.
pub fn oscillation_stats(path: &JumpPath, rho: f64, horizon: f64) -> Result<OscillationStats> {
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    if !(horizon > 0.0) || horizon > path.horizon() {
        return Err(Error::invalid(
            "horizon",
            format!("must lie in (0, {}]", path.horizon()),
        ));
    }
    let threshold = rho / 4.0;
    let mut s_times = vec![0.0];
    let mut anchor = path.initial();
    for (t, v) in path.jumps() {
        if *t > horizon {
            break;
        }
        if v.distance(anchor) >= threshold {
            s_times.push(*t);
            anchor = v;
        }
    }
    let delta_rho = s_times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(OscillationStats {
        count: s_times.len() - 1,
        s_times,
        delta_rho,
    })
}

/// `sup_{t ∈ [0, T]} |ω(t)|` in the Euclidean norm.
pub fn sup_norm(path: &JumpPath, horizon: f64) -> Result<f64> {
    if horizon > path.horizon() {
        return Err(Error::invalid(
            "horizon",
            format!("exceeds the path horizon {}", path.horizon()),
        ));
    }
    Ok(path
        .jumps()
        .iter()
        .take_while(|(t, _)| *t <= horizon)
        .map(|(_, v)| v.norm())
        .fold(path.initial().norm(), f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path1(initial: f64, jumps: &[(f64, f64)], horizon: f64) -> JumpPath {
        JumpPath::new(
            State::scalar(initial),
            jumps.iter().map(|(t, v)| (*t, State::scalar(*v))).collect(),
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn w_prime_examples() {
        let c = path1(3.0, &[], 1.0);
        assert_eq!(w_prime(&c, 0.3, 1.0).unwrap(), 0.0);
        let p = path1(0.0, &[(0.5, 1.0)], 1.0);
        assert_eq!(w_prime(&p, 0.3, 1.0).unwrap(), 0.0);
        let p = path1(0.0, &[(0.1, 1.0)], 1.0);
        assert_eq!(w_prime(&p, 0.2, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn w_prime_breakpoint_at_a_jump_excludes_it() {
        // jumps at 0.5 and 0.65, δ = 0.3: a breakpoint at 0.5 leaves [0.5, T) with {1, 3};
        // cutting at 0.65 instead needs the first interval [0, 0.65) to hold {0, 1}
        let p = path1(0.0, &[(0.5, 1.0), (0.65, 3.0)], 1.0);
        assert_eq!(w_prime(&p, 0.3, 1.0).unwrap(), 1.0);
        // shrink δ so both jumps can be isolated
        assert_eq!(w_prime(&p, 0.1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn last_interval_is_exempt() {
        // the jump at 0.95 sits in the last interval [0.95, 1) of length 0.05 < δ
        let p = path1(0.0, &[(0.95, 1.0)], 1.0);
        assert_eq!(w_prime(&p, 0.5, 1.0).unwrap(), 0.0);
        // δ >= T allows only the single interval
        assert_eq!(w_prime(&p, 2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn jumps_at_the_horizon_are_ignored() {
        let p = path1(0.0, &[(1.0, 5.0)], 2.0);
        assert_eq!(w_prime(&p, 0.9, 1.0).unwrap(), 0.0);
        assert_eq!(sup_norm(&p, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn multidimensional_diameter() {
        let p = JumpPath::new(
            State::new([0.0, 0.0]),
            vec![(0.1, State::new([3.0, 0.0])), (0.2, State::new([3.0, 4.0]))],
            1.0,
        )
        .unwrap();
        assert_eq!(w_prime(&p, 0.5, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn oscillation_examples() {
        let p = path1(0.0, &[(0.2, 0.3), (0.5, 0.6), (0.9, 0.9)], 1.0);
        let s = oscillation_stats(&p, 1.0, 1.0).unwrap();
        assert_eq!(s.s_times, vec![0.0, 0.2, 0.5, 0.9]);
        assert_eq!(s.count, 3);
        assert!((s.delta_rho - 0.2).abs() < 1e-15);

        let s = oscillation_stats(&path1(1.0, &[], 1.0), 1.0, 1.0).unwrap();
        assert_eq!(s.s_times, vec![0.0]);
        assert_eq!(s.count, 0);
        assert_eq!(s.delta_rho, f64::INFINITY);

        let s = oscillation_stats(&path1(0.0, &[(0.4, 1.0)], 1.0), 0.5, 1.0).unwrap();
        assert_eq!(s.s_times, vec![0.0, 0.4]);
        assert_eq!(s.count, 1);
        assert_eq!(s.delta_rho, 0.4);
    }

    #[test]
    fn oscillation_tie_counts_as_crossing() {
        let p = path1(0.0, &[(0.3, 0.25)], 1.0);
        assert_eq!(oscillation_stats(&p, 1.0, 1.0).unwrap().count, 1);
        // sub-threshold jumps accumulate against the anchor
        let p = path1(0.0, &[(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)], 1.0);
        assert_eq!(oscillation_stats(&p, 1.0, 1.0).unwrap().s_times, vec![0.0, 0.3]);
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&path1(3.0, &[], 1.0), 1.0).unwrap(), 3.0);
        assert_eq!(sup_norm(&path1(0.0, &[(0.5, 1.0)], 2.0), 2.0).unwrap(), 1.0);
        let p = JumpPath::new(State::new([0.0, 0.0]), vec![(0.5, State::new([3.0, 4.0]))], 1.0).unwrap();
        assert_eq!(sup_norm(&p, 1.0).unwrap(), 5.0);
    }

    fn arb_path() -> impl Strategy<Value = JumpPath> {
        prop::collection::vec((0.001f64..0.999, 0.0f64..1.0), 0..8)
            .prop_flat_map(|mut jumps| {
                jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
                (Just(jumps), 0.0f64..1.0)
            })
            .prop_map(|(jumps, x0)| path1(x0, &jumps, 1.0))
    }

    proptest! {
        #[test]
        fn w_prime_monotone_in_delta(p in arb_path(), d1 in 0.01f64..0.5, d2 in 0.01f64..0.5) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(w_prime(&p, lo, 1.0).unwrap() <= w_prime(&p, hi, 1.0).unwrap());
        }

        #[test]
        fn w_prime_shrinks_with_horizon(p in arb_path(), d in 0.01f64..0.3, t in 0.35f64..1.0) {
            prop_assert!(w_prime(&p, d, t).unwrap() <= w_prime(&p, d, 1.0).unwrap());
        }

        #[test]
        fn w_prime_vanishes_with_wide_gaps(p in arb_path(), d in 0.005f64..0.2) {
            let mut times: Vec<f64> = vec![0.0];
            times.extend(p.jumps().iter().map(|(t, _)| *t));
            if times.windows(2).all(|w| w[1] - w[0] > d) {
                prop_assert_eq!(w_prime(&p, d, 1.0).unwrap(), 0.0);
            }
        }

        #[test]
        fn oscillation_times_are_jump_times(p in arb_path(), rho in 0.05f64..2.0) {
            let s = oscillation_stats(&p, rho, 1.0).unwrap();
            for t in &s.s_times[1..] {
                prop_assert!(p.jumps().iter().any(|(u, _)| u == t));
            }
        }
    }
}
