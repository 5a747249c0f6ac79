//! Maximum-weight bipartite assignment between nodes (rows) and tasks (columns).

use crate::matrix::Matrix;

/// Node-to-task matching; `None` marks an idle node.
pub type Assignment = Vec<Option<usize>>;

/// Maximum-weight assignment of `min(K, M)` node/task pairs.
///
/// Among optimal assignments the one that is lexicographically smallest in
/// (node, task) order is returned whenever the weights contain repeated values,
/// which is the only way exact ties arise in practice.
pub fn hungarian_match(w: &Matrix) -> Assignment {
    let best = solve(w, None);
    if !has_repeats(w) {
        return best;
    }
    let target = assignment_value(w, &best);
    let tol = 1e-12 * (1.0 + target.abs());
    let mut fixed: Vec<Option<Option<usize>>> = vec![None; w.rows()];
    let mut used = vec![false; w.cols()];
    for k in 0..w.rows() {
        let choices = (0..w.cols()).filter(|&m| !used[m]).map(Some).chain(std::iter::once(None));
        for choice in choices {
            fixed[k] = Some(choice);
            let candidate = solve(w, Some(&fixed));
            if candidate.iter().filter(|c| c.is_some()).count() == w.rows().min(w.cols())
                && (assignment_value(w, &candidate) - target).abs() <= tol
                && candidate[k] == choice
            {
                if let Some(m) = choice {
                    used[m] = true;
                }
                break;
            }
        }
    }
    fixed.into_iter().map(|c| c.flatten()).collect()
}

pub fn assignment_value(w: &Matrix, a: &Assignment) -> f64 {
    a.iter()
        .enumerate()
        .filter_map(|(k, m)| m.map(|m| w.get(k, m)))
        .sum()
}

fn has_repeats(w: &Matrix) -> bool {
    let mut v: Vec<f64> = w.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.windows(2).any(|p| p[0] == p[1])
}

/// Shortest augmenting path on the square padding of `-w`. Pairs pinned in
/// `fixed` are enforced by forbidding every other edge of that row.
fn solve(w: &Matrix, fixed: Option<&[Option<Option<usize>>]>) -> Assignment {
    let (rows, cols) = w.shape();
    let n = rows.max(cols);
    let scale = w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let forbidden = 4.0 * scale * (n as f64 + 1.0);
    let cost = |i: usize, j: usize| -> f64 {
        if let Some(Some(pin)) = fixed.and_then(|f| f.get(i).copied()) {
            let allowed = match pin {
                Some(m) => j == m,
                None => j >= cols,
            };
            if !allowed {
                return forbidden;
            }
        }
        if i < rows && j < cols {
            -w.get(i, j)
        } else {
            0.0
        }
    };

    // 1-based potentials; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=n {
        let (i, task) = (p[j] - 1, j - 1);
        if i < rows && task < cols {
            out[i] = Some(task);
        }
    }
    out
}
