//! Profile (skyline) LDLᵀ factorisation for symmetric positive definite
//! systems, with reverse Cuthill–McKee node ordering to keep the profile
//! narrow.

use std::collections::VecDeque;

/// Symmetric matrix in column-profile storage: column `j` holds rows
/// `first[j]..=j`.
#[derive(Debug, Clone)]
pub struct ProfileMatrix {
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl ProfileMatrix {
    pub fn new(first: Vec<usize>) -> Self {
        let mut offset = Vec::with_capacity(first.len() + 1);
        let mut total = 0;
        for (j, f) in first.iter().enumerate() {
            debug_assert!(*f <= j);
            offset.push(total);
            total += j - f + 1;
        }
        offset.push(total);
        ProfileMatrix { first, offset, values: vec![0.0; total] }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    /// Adds `v` at (i, j); the entry must lie inside the profile.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(r >= self.first[c], "entry ({r}, {c}) outside profile");
        self.values[self.offset[c] + r - self.first[c]] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        if r < self.first[c] {
            0.0
        } else {
            self.values[self.offset[c] + r - self.first[c]]
        }
    }

    /// y = A x
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for j in 0..n {
            let col = &self.values[self.offset[j]..self.offset[j + 1]];
            let f = self.first[j];
            for (k, a) in col.iter().enumerate() {
                let i = f + k;
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place LDLᵀ. Fails with the index of the first pivot that is not
    /// positive or falls below `rel_tol` times the largest pivot so far.
    pub fn factorize(mut self, rel_tol: f64) -> Result<LdlFactor, usize> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut max_pivot: f64 = 0.0;
        for j in 0..n {
            let mj = self.first[j];
            let (before, rest) = self.values.split_at_mut(self.offset[j]);
            let col_j = &mut rest[..j - mj + 1];
            for i in mj..j {
                let mi = self.first[i];
                let col_i = &before[self.offset[i]..self.offset[i + 1]];
                let r0 = mi.max(mj);
                let mut s = 0.0;
                for r in r0..i {
                    s += col_i[r - mi] * col_j[r - mj];
                }
                col_j[i - mj] -= s;
            }
            let mut dj = col_j[j - mj];
            for i in mj..j {
                let g = col_j[i - mj];
                let l = g / d[i];
                dj -= l * g;
                col_j[i - mj] = l;
            }
            max_pivot = max_pivot.max(dj.abs());
            if !(dj > rel_tol * max_pivot) {
                return Err(j);
            }
            col_j[j - mj] = 1.0;
            d[j] = dj;
        }
        Ok(LdlFactor { l: self, d })
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    l: ProfileMatrix,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let l = &self.l;
        for j in 0..n {
            let mj = l.first[j];
            let col = &l.values[l.offset[j]..l.offset[j + 1]];
            let mut s = 0.0;
            for r in mj..j {
                s += col[r - mj] * x[r];
            }
            x[j] -= s;
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mj = l.first[j];
            let col = &l.values[l.offset[j]..l.offset[j + 1]];
            let xj = x[j];
            for r in mj..j {
                x[r] -= col[r - mj] * xj;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Reverse Cuthill–McKee ordering of an undirected graph given as adjacency
/// lists. Returns `order[k]` = vertex placed at position `k`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adj[v].len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (degree(v), v));
    for &s in &starts {
        if seen[s] {
            continue;
        }
        // Move toward a pseudo-peripheral vertex: repeat BFS from the last
        // level's lowest-degree vertex a few times.
        let mut root = s;
        for _ in 0..3 {
            let last = bfs_last_level(adj, root, &seen);
            let cand = *last.iter().min_by_key(|&&v| (degree(v), v)).unwrap();
            if cand == root {
                break;
            }
            root = cand;
        }
        let mut queue = VecDeque::new();
        seen[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|w| !seen[*w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            next.dedup();
            for w in next {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_last_level(adj: &[Vec<usize>], root: usize, blocked: &[bool]) -> Vec<usize> {
    let mut dist = std::collections::HashMap::new();
    dist.insert(root, 0usize);
    let mut queue = VecDeque::from([root]);
    let mut max = 0;
    while let Some(v) = queue.pop_front() {
        let dv = dist[&v];
        max = max.max(dv);
        for &w in &adj[v] {
            if !blocked[w] && !dist.contains_key(&w) {
                dist.insert(w, dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().filter(|(_, d)| *d == max).map(|(v, _)| v).collect()
}
