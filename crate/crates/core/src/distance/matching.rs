//! Bipartite matching and bottleneck assignment.

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

/// Maximum matching of a bipartite graph with `n_left` and `n_right`
/// vertices (Hopcroft–Karp). Returns, for each left vertex, its partner.
pub fn hopcroft_karp(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut match_l = vec![FREE; n_left];
    let mut match_r = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    loop {
        // Layer the free left vertices and everything reachable along
        // alternating paths.
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for u in 0..n_left {
            if match_l[u] == FREE {
                augment(u, adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }
    match_l
        .into_iter()
        .map(|v| (v != FREE).then_some(v))
        .collect()
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let w = match_r[v];
        if w == FREE || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Perfect matching using only pairs with `cost[i][j] <= threshold`.
pub fn perfect_matching_within(cost: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let n = cost.len();
    let adj: Vec<Vec<usize>> = cost
        .iter()
        .map(|row| (0..n).filter(|&j| row[j] <= threshold).collect())
        .collect();
    hopcroft_karp(n, n, &adj).into_iter().collect()
}

/// Bottleneck assignment on a square cost matrix: the permutation `σ`
/// minimizing `max_i cost[i][σ(i)]`, together with that value.
///
/// The optimum is one of the entries, so a binary search over the sorted
/// distinct entries with a perfect-matching feasibility test finds it.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut values: Vec<f64> = cost.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let (mut lo, mut hi) = (0, values.len() - 1);
    // `best` always realizes `values[hi]`.
    let mut best =
        perfect_matching_within(cost, values[hi]).expect("complete graph has a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching_within(cost, values[mid]) {
            Some(perm) => {
                best = perm;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    (values[lo], best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_on_small_graph() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = hopcroft_karp(3, 3, &adj);
        assert!(m.iter().all(Option::is_some));
        let adj = vec![vec![0], vec![0]];
        assert_eq!(hopcroft_karp(2, 1, &adj).iter().flatten().count(), 1);
    }

    #[test]
    fn bottleneck_prefers_balanced_assignment() {
        let cost = vec![vec![0.0, 0.5], vec![0.5, 1.0]];
        let (v, perm) = bottleneck_assignment(&cost);
        assert_eq!(v, 0.5);
        assert_eq!(perm, vec![1, 0]);
    }
}
