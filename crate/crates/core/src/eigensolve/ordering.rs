//! Reverse Cuthill-McKee ordering for profile reduction.

use std::collections::VecDeque;

use crate::sparse::CsrMatrix;

fn neighbours(m: &CsrMatrix, i: usize) -> impl Iterator<Item = usize> + '_ {
    m.row(i).filter(move |&(j, v)| j != i && v != 0.0).map(|(j, _)| j)
}

/// BFS level structure from `root` restricted to unvisited nodes; returns
/// the nodes of the last level and the number of levels.
fn last_level(m: &CsrMatrix, degree: &[usize], root: usize, blocked: &[bool]) -> (Vec<usize>, usize) {
    let n = m.dim();
    let mut level = vec![usize::MAX; n];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut depth = 0;
    let mut last = vec![root];
    while let Some(i) = queue.pop_front() {
        for j in neighbours(m, i) {
            if !blocked[j] && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                if level[j] > depth {
                    depth = level[j];
                    last.clear();
                }
                last.push(j);
                queue.push_back(j);
            }
        }
    }
    last.sort_by_key(|&j| degree[j]);
    (last, depth)
}

/// Permutation `perm[new] = old` that reduces the envelope of `m`.
pub fn reverse_cuthill_mckee(m: &CsrMatrix) -> Vec<usize> {
    let n = m.dim();
    let degree: Vec<usize> = (0..n).map(|i| neighbours(m, i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start node (George-Liu).
        let mut root = seed;
        let (mut last, mut depth) = last_level(m, &degree, root, &visited);
        loop {
            let candidate = last[0];
            let (next_last, next_depth) = last_level(m, &degree, candidate, &visited);
            if next_depth <= depth {
                break;
            }
            root = candidate;
            last = next_last;
            depth = next_depth;
        }

        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            let mut next: Vec<usize> = neighbours(m, i).filter(|&j| !visited[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            next.dedup();
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}
