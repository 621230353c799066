use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::env::{l1_norm, Environment, EnvironmentLaw, LatticeBox, PeriodicEnvironment, SiteSampler};
use crate::error::{Error, Result};

/// Sites a scan may inspect before giving up.
pub const DEFAULT_SITE_CAP: usize = 50_000_000;

/// `floor(N / ln N)`, the search radius (and corridor length); 0 for `N < 3`.
pub fn search_radius(n: usize) -> i64 {
    if n < 3 {
        return 0;
    }
    (n as f64 / (n as f64).ln()).floor() as i64
}

/// `floor(delta (ln N)^{1/d})`.
pub fn ball_radius(delta: f64, n: usize, dim: usize) -> i64 {
    if n < 2 {
        return 0;
    }
    (delta * (n as f64).ln().powf(1.0 / dim as f64) + 1e-12).floor() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Every center of the search box.
    Exhaustive,
    /// Centers in order of `|y|_1`, stopping at the first hit.
    Nearest,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub search_radius: i64,
    pub ball_radius: i64,
    pub mode: ScanMode,
    pub centers_checked: usize,
    /// Centers whose sup-norm ball matches, in scan order.
    pub hits: Vec<Vec<i64>>,
    /// False when the nearest-first search hit the site cap.
    pub complete: bool,
}

/// Whether every site of the sup-norm ball of radius `b` about `center`
/// carries a vector within `epsilon` of the target's (absolute
/// coordinates: the target is not re-centred).
pub fn verify_hit(omega: &dyn Environment, target: &PeriodicEnvironment, epsilon: f64, b: i64, center: &[i64]) -> Result<bool> {
    let ball = LatticeBox::new(center.iter().map(|c| c - b).collect(), center.iter().map(|c| c + b).collect())?;
    for x in ball.points() {
        if omega.site(&x)?.sup_distance(target.lookup(&x)) > epsilon {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slides the ball over the search box `B(0, floor(N / ln N))`.
pub fn scan_environment(
    omega: &dyn Environment,
    target: &PeriodicEnvironment,
    epsilon: f64,
    delta: f64,
    n: usize,
    mode: ScanMode,
    site_cap: usize,
) -> Result<ScanReport> {
    if epsilon < 0.0 || !(delta > 0.0) {
        return Err(Error::invalid("scan needs epsilon >= 0 and delta > 0"));
    }
    let d = omega.dim();
    if target.dim() != d {
        return Err(Error::invalid("target and environment dimensions differ"));
    }
    let r = search_radius(n);
    let b = ball_radius(delta, n, d);
    let mut report = ScanReport {
        n,
        epsilon,
        delta,
        search_radius: r,
        ball_radius: b,
        mode,
        centers_checked: 0,
        hits: Vec::new(),
        complete: true,
    };
    match mode {
        ScanMode::Exhaustive => exhaustive(omega, target, r, b, site_cap, &mut report)?,
        ScanMode::Nearest => nearest(omega, target, r, b, site_cap, &mut report)?,
    }
    Ok(report)
}

/// [`scan_environment`] on the i.i.d. environment drawn lazily from `law`.
pub fn scan_for_g(
    law: &EnvironmentLaw,
    target: &PeriodicEnvironment,
    epsilon: f64,
    delta: f64,
    n: usize,
    seed: u64,
    mode: ScanMode,
) -> Result<ScanReport> {
    let omega = SiteSampler::new(law.clone(), seed);
    scan_environment(&omega, target, epsilon, delta, n, mode, DEFAULT_SITE_CAP)
}

/// The smallest `N` of the grid at which the scan finds a hit.
pub fn first_hit_n(law: &EnvironmentLaw, target: &PeriodicEnvironment, epsilon: f64, delta: f64, grid: &[usize], seed: u64) -> Result<Option<usize>> {
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    for n in grid {
        if !scan_for_g(law, target, epsilon, delta, n, seed, ScanMode::Nearest)?.hits.is_empty() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn exhaustive(omega: &dyn Environment, target: &PeriodicEnvironment, r: i64, b: i64, cap: usize, rep: &mut ScanReport) -> Result<()> {
    let d = omega.dim();
    let outer = LatticeBox::centered(d, r + b);
    if outer.num_sites() > cap {
        return Err(Error::ResourceCap(format!("scan box of {} sites exceeds the cap of {cap}", outer.num_sites())));
    }
    let close: Vec<bool> = outer
        .points()
        .map(|x| Ok(omega.site(&x)?.sup_distance(target.lookup(&x)) <= rep.epsilon))
        .collect::<Result<_>>()?;
    // Separable erosion: after pass `a`, a site is set iff every site
    // within distance b along axes 0..=a is close.
    let side = (2 * (r + b) + 1) as usize;
    let mut cur = close;
    let mut stride = 1usize;
    for _ in 0..d {
        let mut next = vec![false; cur.len()];
        for start in 0..cur.len() {
            if (start / stride) % side != 0 {
                continue;
            }
            // a line along this axis
            let mut run = 0i64;
            let mut runs = vec![0i64; side];
            for i in 0..side {
                run = if cur[start + i * stride] { run + 1 } else { 0 };
                runs[i] = run;
            }
            // set[i] iff the window [i-b, i+b] is all close
            for i in 0..side {
                let hi = i as i64 + b;
                if hi < side as i64 && runs[hi as usize] >= 2 * b + 1 {
                    next[start + i * stride] = true;
                }
            }
        }
        cur = next;
        stride *= side;
    }
    let inner = LatticeBox::centered(d, r);
    for y in inner.points() {
        rep.centers_checked += 1;
        if cur[outer.index_of(&y).expect("inner box inside outer")] {
            rep.hits.push(y);
        }
    }
    Ok(())
}

/// Centers `y` with `|y|_inf <= r` in order of `|y|_1`, then
/// lexicographically.
fn shell(d: usize, radius: i64, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(d: usize, left: i64, r: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == d - 1 {
            if left <= r {
                cur.push(-left);
                out.push(cur.clone());
                cur.pop();
                if left > 0 {
                    cur.push(left);
                    out.push(cur.clone());
                    cur.pop();
                }
            }
            return;
        }
        for v in -left.min(r)..=left.min(r) {
            cur.push(v);
            rec(d, left - v.abs(), r, cur, out);
            cur.pop();
        }
    }
    rec(d, radius, r, &mut cur, &mut out);
    out
}

fn nearest(omega: &dyn Environment, target: &PeriodicEnvironment, r: i64, b: i64, cap: usize, rep: &mut ScanReport) -> Result<()> {
    let d = omega.dim();
    let mut close: HashMap<Vec<i64>, bool> = HashMap::new();
    let mut inspected = 0usize;
    let ball = LatticeBox::centered(d, b);
    let offsets: Vec<Vec<i64>> = ball.points().collect();
    for radius in 0..=(d as i64 * r) {
        for y in shell(d, radius, r) {
            rep.centers_checked += 1;
            let mut ok = true;
            for off in &offsets {
                let x: Vec<i64> = y.iter().zip(off).map(|(a, o)| a + o).collect();
                let hit = match close.get(&x) {
                    Some(&h) => h,
                    None => {
                        inspected += 1;
                        let h = omega.site(&x)?.sup_distance(target.lookup(&x)) <= rep.epsilon;
                        close.insert(x, h);
                        h
                    }
                };
                if !hit {
                    ok = false;
                    break;
                }
            }
            if ok {
                debug_assert!(l1_norm(&y) == radius);
                rep.hits.push(y);
                return Ok(());
            }
            if inspected > cap {
                rep.complete = false;
                return Ok(());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ProbVec;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    fn law(w: f64) -> EnvironmentLaw {
        EnvironmentLaw::new(vec![pv(&[0.4, 0.1, 0.3, 0.2]), pv(&[0.1, 0.4, 0.3, 0.2])], vec![w, 1.0 - w], 0.1).unwrap()
    }

    #[test]
    fn radii() {
        assert_eq!(search_radius(1000), 144);
        assert_eq!(ball_radius(0.5, 2981, 1), 4); // ln 2981 = 8.0001
        assert_eq!(ball_radius(1.0, 1000, 2), 2);
    }

    #[test]
    fn lenient_epsilon_matches_everywhere() {
        let target = PeriodicEnvironment::homogeneous(pv(&[0.25; 4])).unwrap();
        let rep = scan_for_g(&law(0.5), &target, 1.0, 1.0, 200, 1, ScanMode::Exhaustive).unwrap();
        let side = 2 * rep.search_radius as usize + 1;
        assert_eq!(rep.hits.len(), side * side);
    }

    #[test]
    fn single_site_hits_are_binomial() {
        let w = 0.3;
        let target = PeriodicEnvironment::homogeneous(pv(&[0.4, 0.1, 0.3, 0.2])).unwrap();
        let rep = scan_for_g(&law(w), &target, 0.01, 0.1, 2000, 11, ScanMode::Exhaustive).unwrap();
        assert_eq!(rep.ball_radius, 0);
        let centers = rep.centers_checked as f64;
        let sd = (centers * w * (1.0 - w)).sqrt();
        assert!((rep.hits.len() as f64 - centers * w).abs() <= 5.0 * sd);
    }

    #[test]
    fn hits_verify_and_agree_across_modes() {
        let target = PeriodicEnvironment::homogeneous(pv(&[0.4, 0.1, 0.3, 0.2])).unwrap();
        let l = law(0.6);
        let omega = SiteSampler::new(l.clone(), 5);
        let all = scan_for_g(&l, &target, 0.01, 0.8, 500, 5, ScanMode::Exhaustive).unwrap();
        assert!(all.ball_radius >= 1 && !all.hits.is_empty());
        for y in &all.hits {
            assert!(verify_hit(&omega, &target, 0.01, all.ball_radius, y).unwrap());
        }
        let near = scan_for_g(&l, &target, 0.01, 0.8, 500, 5, ScanMode::Nearest).unwrap();
        let best = all.hits.iter().map(|y| l1_norm(y)).min().unwrap();
        assert_eq!(l1_norm(&near.hits[0]), best);
        assert!(all.hits.contains(&near.hits[0]));
    }

    #[test]
    fn monotone_in_epsilon_and_delta() {
        let target = PeriodicEnvironment::homogeneous(pv(&[0.35, 0.15, 0.3, 0.2])).unwrap();
        let l = law(0.5);
        let count = |eps, delta| scan_for_g(&l, &target, eps, delta, 400, 2, ScanMode::Exhaustive).unwrap().hits.len();
        assert!(count(0.04, 0.5) <= count(0.06, 0.5));
        assert!(count(0.06, 0.5) >= count(0.06, 1.0));
        let grid = [50, 100, 200, 400, 800];
        for seed in 0..20 {
            let tight = first_hit_n(&l, &target, 0.05, 0.9, &grid, seed).unwrap().unwrap_or(usize::MAX);
            let loose = first_hit_n(&l, &target, 0.3, 0.9, &grid, seed).unwrap().unwrap_or(usize::MAX);
            assert!(loose <= tight);
        }
    }

    #[test]
    fn shells_cover_the_box_once() {
        let mut all: Vec<Vec<i64>> = (0..=6).flat_map(|k| shell(2, k, 3)).collect();
        assert_eq!(all.len(), 49);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 49);
    }
}
