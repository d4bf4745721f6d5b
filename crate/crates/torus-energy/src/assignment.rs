/// Minimum-cost perfect matching on a square cost matrix
/// (Jonker-Volgenant style shortest augmenting paths, O(n^3)).
///
/// Returns `perm` with `perm[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(cost.iter().all(|r| r.len() == n));
    // 1-based with column 0 as sentinel
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            perm[matched_row[j] - 1] = j - 1;
        }
    }
    perm
}

/// Greedy matching with an optimality audit: if every row's global nearest
/// column is distinct, that bijection attains every row minimum and is
/// therefore optimal for both the total and the bottleneck cost. Returns
/// `None` when the audit fails.
pub fn greedy_nearest_audit(cost: &[Vec<f64>]) -> Option<Vec<usize>> {
    let n = cost.len();
    let mut perm = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    for row in cost {
        let mut best = 0usize;
        for j in 1..n {
            if row[j] < row[best] {
                best = j;
            }
        }
        if taken[best] {
            return None;
        }
        taken[best] = true;
        perm.push(best);
    }
    Some(perm)
}

/// Matching dispatcher per the alignment policy: exact Hungarian up to 256
/// points, greedy-with-audit above that, falling back to Hungarian when the
/// audit fails.
pub fn match_points(cost: &[Vec<f64>]) -> Vec<usize> {
    if cost.len() > 256 {
        if let Some(p) = greedy_nearest_audit(cost) {
            return p;
        }
    }
    hungarian(cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
            let n = cost.len();
            if row == n {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    fn total(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut state = 1234567u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=7 {
            for _ in 0..20 {
                let cost: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let perm = hungarian(&cost);
                let mut seen = vec![false; n];
                for &j in &perm {
                    assert!(!seen[j]);
                    seen[j] = true;
                }
                let got = total(&cost, &perm);
                let want = brute_force(&cost);
                assert!((got - want).abs() < 1e-12, "n={} got={} want={}", n, got, want);
            }
        }
    }

    #[test]
    fn greedy_audit_accepts_diagonal_dominant() {
        let cost = vec![
            vec![0.1, 5.0, 5.0],
            vec![5.0, 0.2, 5.0],
            vec![5.0, 5.0, 0.3],
        ];
        assert_eq!(greedy_nearest_audit(&cost), Some(vec![0, 1, 2]));
    }

    #[test]
    fn greedy_audit_rejects_contention() {
        let cost = vec![vec![0.1, 5.0], vec![0.2, 5.0]];
        assert_eq!(greedy_nearest_audit(&cost), None);
        // the dispatcher still produces a valid optimal matching
        let perm = hungarian(&cost);
        assert_eq!(perm.len(), 2);
        assert_ne!(perm[0], perm[1]);
    }
}
