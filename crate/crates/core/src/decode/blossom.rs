//! Maximum-weight matching in general graphs (Edmonds' blossom algorithm,
//! primal-dual, O(n³) on a dense adjacency matrix).
//!
//! Vertices are numbered from 1 internally; 0 is the null vertex. Indices
//! above `n` name blossoms. Vertex duals are stored doubled so that every
//! quantity stays integral.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Default)]
struct Edge {
    u: usize,
    v: usize,
    w: i64,
}

const UNLABELED: i8 = -1;
const OUTER: i8 = 0;
const INNER: i8 = 1;

struct Blossom {
    n: usize,
    nx: usize,
    stride: usize,
    g: Vec<Edge>,
    lab: Vec<i64>,
    mate: Vec<usize>,
    slack: Vec<usize>,
    st: Vec<usize>,
    pa: Vec<usize>,
    label: Vec<i8>,
    vis: Vec<usize>,
    vis_stamp: usize,
    flower_from: Vec<usize>,
    flower: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
}

impl Blossom {
    fn new(n: usize) -> Self {
        let stride = 2 * n + 1;
        let mut g = vec![Edge::default(); stride * stride];
        for u in 1..=n {
            for v in 1..=n {
                g[u * stride + v] = Edge { u, v, w: 0 };
            }
        }
        let mut flower_from = vec![0; stride * (n + 1)];
        for u in 1..=n {
            flower_from[u * (n + 1) + u] = u;
        }
        Self {
            n,
            nx: n,
            stride,
            g,
            lab: vec![0; stride],
            mate: vec![0; stride],
            slack: vec![0; stride],
            st: (0..stride).collect(),
            pa: vec![0; stride],
            label: vec![UNLABELED; stride],
            vis: vec![0; stride],
            vis_stamp: 0,
            flower_from,
            flower: vec![Vec::new(); stride],
            queue: VecDeque::new(),
        }
    }

    #[inline]
    fn edge(&self, u: usize, v: usize) -> Edge {
        self.g[u * self.stride + v]
    }

    #[inline]
    fn set_weight(&mut self, u: usize, v: usize, w: i64) {
        self.g[u * self.stride + v].w = w;
        self.g[v * self.stride + u].w = w;
    }

    #[inline]
    fn slack_of(&self, e: Edge) -> i64 {
        self.lab[e.u] + self.lab[e.v] - self.edge(e.u, e.v).w * 2
    }

    #[inline]
    fn flower_from(&self, b: usize, x: usize) -> usize {
        self.flower_from[b * (self.n + 1) + x]
    }

    fn update_slack(&mut self, u: usize, x: usize) {
        let s = self.slack[x];
        if s == 0 || self.slack_of(self.edge(u, x)) < self.slack_of(self.edge(s, x)) {
            self.slack[x] = u;
        }
    }

    fn set_slack(&mut self, x: usize) {
        self.slack[x] = 0;
        for u in 1..=self.n {
            if self.edge(u, x).w > 0 && self.st[u] != x && self.label[self.st[u]] == OUTER {
                self.update_slack(u, x);
            }
        }
    }

    fn queue_push(&mut self, x: usize) {
        if x <= self.n {
            self.queue.push_back(x);
        } else {
            for i in 0..self.flower[x].len() {
                let child = self.flower[x][i];
                self.queue_push(child);
            }
        }
    }

    fn set_st(&mut self, x: usize, b: usize) {
        self.st[x] = b;
        if x > self.n {
            for i in 0..self.flower[x].len() {
                let child = self.flower[x][i];
                self.set_st(child, b);
            }
        }
    }

    /// Position of `xr` in blossom `b`, reorienting the cycle so that the
    /// position is even.
    fn get_pr(&mut self, b: usize, xr: usize) -> usize {
        let pr = self.flower[b]
            .iter()
            .position(|&x| x == xr)
            .expect("sub-blossom belongs to its parent");
        if pr % 2 == 1 {
            self.flower[b][1..].reverse();
            self.flower[b].len() - pr
        } else {
            pr
        }
    }

    fn set_match(&mut self, u: usize, v: usize) {
        let e = self.edge(u, v);
        self.mate[u] = e.v;
        if u > self.n {
            let xr = self.flower_from(u, e.u);
            let pr = self.get_pr(u, xr);
            for i in 0..pr {
                let (a, c) = (self.flower[u][i], self.flower[u][i ^ 1]);
                self.set_match(a, c);
            }
            self.set_match(xr, v);
            self.flower[u].rotate_left(pr);
        }
    }

    fn augment(&mut self, mut u: usize, mut v: usize) {
        loop {
            let xnv = self.st[self.mate[u]];
            self.set_match(u, v);
            if xnv == 0 {
                return;
            }
            let next = self.st[self.pa[xnv]];
            self.set_match(xnv, next);
            u = next;
            v = xnv;
        }
    }

    fn get_lca(&mut self, mut u: usize, mut v: usize) -> usize {
        self.vis_stamp += 1;
        let t = self.vis_stamp;
        while u != 0 || v != 0 {
            if u != 0 {
                if self.vis[u] == t {
                    return u;
                }
                self.vis[u] = t;
                u = self.st[self.mate[u]];
                if u != 0 {
                    u = self.st[self.pa[u]];
                }
            }
            std::mem::swap(&mut u, &mut v);
        }
        0
    }

    fn add_blossom(&mut self, u: usize, lca: usize, v: usize) {
        let mut b = self.n + 1;
        while b <= self.nx && self.st[b] != 0 {
            b += 1;
        }
        if b > self.nx {
            self.nx += 1;
        }
        self.lab[b] = 0;
        self.label[b] = OUTER;
        self.mate[b] = self.mate[lca];
        let mut flower = std::mem::take(&mut self.flower[b]);
        flower.clear();
        flower.push(lca);
        let mut x = u;
        while x != lca {
            flower.push(x);
            let y = self.st[self.mate[x]];
            flower.push(y);
            self.queue_push(y);
            x = self.st[self.pa[y]];
        }
        flower[1..].reverse();
        let mut x = v;
        while x != lca {
            flower.push(x);
            let y = self.st[self.mate[x]];
            flower.push(y);
            self.queue_push(y);
            x = self.st[self.pa[y]];
        }
        self.flower[b] = flower;
        self.set_st(b, b);
        for x in 1..=self.nx {
            self.g[b * self.stride + x].w = 0;
            self.g[x * self.stride + b].w = 0;
        }
        let nn = self.n + 1;
        for x in 1..=self.n {
            self.flower_from[b * nn + x] = 0;
        }
        for i in 0..self.flower[b].len() {
            let xs = self.flower[b][i];
            for x in 1..=self.nx {
                let cur = self.edge(b, x);
                let cand = self.edge(xs, x);
                if cur.w == 0 || self.slack_of(cand) < self.slack_of(cur) {
                    self.g[b * self.stride + x] = cand;
                    self.g[x * self.stride + b] = self.edge(x, xs);
                }
            }
            for x in 1..=self.n {
                if self.flower_from(xs, x) != 0 {
                    self.flower_from[b * nn + x] = xs;
                }
            }
        }
        self.set_slack(b);
    }

    fn expand_blossom(&mut self, b: usize) {
        for i in 0..self.flower[b].len() {
            let xs = self.flower[b][i];
            self.set_st(xs, xs);
        }
        let xr = self.flower_from(b, self.edge(b, self.pa[b]).u);
        let pr = self.get_pr(b, xr);
        let mut i = 0;
        while i < pr {
            let xs = self.flower[b][i];
            let xns = self.flower[b][i + 1];
            self.pa[xs] = self.edge(xns, xs).u;
            self.label[xs] = INNER;
            self.label[xns] = OUTER;
            self.slack[xs] = 0;
            self.set_slack(xns);
            self.queue_push(xns);
            i += 2;
        }
        self.label[xr] = INNER;
        self.pa[xr] = self.pa[b];
        for i in pr + 1..self.flower[b].len() {
            let xs = self.flower[b][i];
            self.label[xs] = UNLABELED;
            self.set_slack(xs);
        }
        self.st[b] = 0;
    }

    fn on_found_edge(&mut self, e: Edge) -> bool {
        let u = self.st[e.u];
        let v = self.st[e.v];
        if self.label[v] == UNLABELED {
            self.pa[v] = e.u;
            self.label[v] = INNER;
            let nu = self.st[self.mate[v]];
            self.slack[v] = 0;
            self.slack[nu] = 0;
            self.label[nu] = OUTER;
            self.queue_push(nu);
        } else if self.label[v] == OUTER {
            let lca = self.get_lca(u, v);
            if lca == 0 {
                self.augment(u, v);
                self.augment(v, u);
                return true;
            }
            self.add_blossom(u, lca, v);
        }
        false
    }

    /// One augmentation stage; false when no augmenting path remains.
    fn stage(&mut self) -> bool {
        for x in 1..=self.nx {
            self.label[x] = UNLABELED;
            self.slack[x] = 0;
        }
        self.queue.clear();
        for x in 1..=self.nx {
            if self.st[x] == x && self.mate[x] == 0 {
                self.pa[x] = 0;
                self.label[x] = OUTER;
                self.queue_push(x);
            }
        }
        if self.queue.is_empty() {
            return false;
        }
        loop {
            while let Some(u) = self.queue.pop_front() {
                if self.label[self.st[u]] == INNER {
                    continue;
                }
                for v in 1..=self.n {
                    let e = self.edge(u, v);
                    if e.w > 0 && self.st[u] != self.st[v] {
                        if self.slack_of(e) == 0 {
                            if self.on_found_edge(e) {
                                return true;
                            }
                        } else {
                            let sv = self.st[v];
                            self.update_slack(u, sv);
                        }
                    }
                }
            }
            let mut d = i64::MAX;
            for b in self.n + 1..=self.nx {
                if self.st[b] == b && self.label[b] == INNER {
                    d = d.min(self.lab[b] / 2);
                }
            }
            for x in 1..=self.nx {
                if self.st[x] == x && self.slack[x] != 0 {
                    let s = self.slack_of(self.edge(self.slack[x], x));
                    if self.label[x] == UNLABELED {
                        d = d.min(s);
                    } else if self.label[x] == OUTER {
                        d = d.min(s / 2);
                    }
                }
            }
            for u in 1..=self.n {
                match self.label[self.st[u]] {
                    OUTER => {
                        if self.lab[u] <= d {
                            return false;
                        }
                        self.lab[u] -= d;
                    }
                    INNER => self.lab[u] += d,
                    _ => {}
                }
            }
            for b in self.n + 1..=self.nx {
                if self.st[b] == b {
                    match self.label[b] {
                        OUTER => self.lab[b] += 2 * d,
                        INNER => self.lab[b] -= 2 * d,
                        _ => {}
                    }
                }
            }
            self.queue.clear();
            for x in 1..=self.nx {
                let s = self.slack[x];
                if self.st[x] == x
                    && s != 0
                    && self.st[s] != x
                    && self.slack_of(self.edge(s, x)) == 0
                    && self.on_found_edge(self.edge(s, x))
                {
                    return true;
                }
            }
            for b in self.n + 1..=self.nx {
                if self.st[b] == b && self.label[b] == INNER && self.lab[b] == 0 {
                    self.expand_blossom(b);
                }
            }
        }
    }

    fn solve(&mut self) {
        let w_max = (1..=self.n)
            .flat_map(|u| (1..=self.n).map(move |v| (u, v)))
            .map(|(u, v)| self.edge(u, v).w)
            .max()
            .unwrap_or(0);
        for u in 1..=self.n {
            self.lab[u] = w_max;
        }
        while self.stage() {}
    }
}

/// Maximum-weight matching. Edge weights must be positive; `mate[v]` is the
/// partner of `v` or `None`.
pub fn max_weight_matching(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Option<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let mut solver = Blossom::new(n);
    for &(u, v, w) in edges {
        assert!(u != v && u < n && v < n, "bad edge ({u}, {v})");
        assert!(w > 0, "edge weights must be positive");
        let cur = solver.edge(u + 1, v + 1).w;
        solver.set_weight(u + 1, v + 1, cur.max(w));
    }
    solver.solve();
    (1..=n)
        .map(|u| match solver.mate[u] {
            0 => None,
            m => Some(m - 1),
        })
        .collect()
}

/// Minimum-total-cost perfect matching; `Err` if none exists.
///
/// Costs are flipped into weights `C - cost` with `C` large enough that any
/// matching with more edges outweighs every matching with fewer, so the
/// maximum-weight matching is perfect whenever a perfect matching exists.
pub fn min_weight_perfect_matching(n: usize, edges: &[(usize, usize, u32)]) -> Result<Vec<usize>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if n % 2 == 1 {
        return Err(Error::InvalidSyndrome(format!(
            "{n} vertices cannot be perfectly matched"
        )));
    }
    let max_cost = edges.iter().map(|e| i64::from(e.2)).max().unwrap_or(0);
    let big = (n as i64 / 2 + 1) * (max_cost + 1) + 1;
    let flipped: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(u, v, c)| (u, v, big - i64::from(c)))
        .collect();
    let mate = max_weight_matching(n, &flipped);
    mate.into_iter()
        .map(|m| m.ok_or_else(|| Error::InvalidSyndrome("no perfect matching exists".into())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_min_perfect(n: usize, cost: &dyn Fn(usize, usize) -> Option<u32>) -> Option<u64> {
        fn rec(free: &mut Vec<usize>, cost: &dyn Fn(usize, usize) -> Option<u32>) -> Option<u64> {
            if free.is_empty() {
                return Some(0);
            }
            let a = free.remove(0);
            let mut best: Option<u64> = None;
            for i in 0..free.len() {
                let b = free.remove(i);
                if let Some(c) = cost(a, b) {
                    if let Some(rest) = rec(free, cost) {
                        let total = rest + u64::from(c);
                        best = Some(best.map_or(total, |x| x.min(total)));
                    }
                }
                free.insert(i, b);
            }
            free.insert(0, a);
            best
        }
        rec(&mut (0..n).collect(), cost)
    }

    fn total(mate: &[usize], cost: &dyn Fn(usize, usize) -> Option<u32>) -> u64 {
        mate.iter()
            .enumerate()
            .filter(|(u, &v)| *u < v)
            .map(|(u, &v)| u64::from(cost(u, v).unwrap()))
            .sum()
    }

    #[test]
    fn empty_and_pair() {
        assert!(min_weight_perfect_matching(0, &[]).unwrap().is_empty());
        assert_eq!(
            min_weight_perfect_matching(2, &[(0, 1, 5)]).unwrap(),
            vec![1, 0]
        );
        assert!(min_weight_perfect_matching(3, &[(0, 1, 1), (1, 2, 1)]).is_err());
    }

    #[test]
    fn odd_cycle_needs_a_blossom() {
        // Triangle 0-1-2 with vertex 3 hanging off 2.
        let edges = [(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1), (0, 3, 10)];
        let mate = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(mate, vec![1, 0, 3, 2]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn random_dense_graphs_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let n = 2 * rng.random_range(1..=6);
            let mut w = vec![vec![None; n]; n];
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < 0.8 {
                        let c = rng.random_range(0..20u32);
                        w[u][v] = Some(c);
                        w[v][u] = Some(c);
                        edges.push((u, v, c));
                    }
                }
            }
            let cost = |a: usize, b: usize| w[a][b];
            let expected = brute_min_perfect(n, &cost);
            match min_weight_perfect_matching(n, &edges) {
                Ok(mate) => {
                    for (u, &v) in mate.iter().enumerate() {
                        assert_eq!(mate[v], u);
                    }
                    assert_eq!(Some(total(&mate, &cost)), expected);
                }
                Err(_) => assert_eq!(expected, None),
            }
        }
    }

    #[test]
    fn agrees_with_reference_implementation_on_large_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for round in 0..40 {
            let n = 2 * rng.random_range(10..=40);
            let pts: Vec<(i64, i64)> = (0..n)
                .map(|_| (rng.random_range(0..15), rng.random_range(0..15)))
                .collect();
            let mut edges = Vec::new();
            let mut reference = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let d = (pts[u].0 - pts[v].0).abs() + (pts[u].1 - pts[v].1).abs();
                    edges.push((u, v, d as u32));
                    reference.push((u, v, 1000 - d as i32));
                }
            }
            let mate = min_weight_perfect_matching(n, &edges).unwrap();
            let ours: i64 = mate
                .iter()
                .enumerate()
                .filter(|(u, &v)| *u < v)
                .map(|(u, &v)| (pts[u].0 - pts[v].0).abs() + (pts[u].1 - pts[v].1).abs())
                .sum();
            let mut m = mwmatching::Matching::new(reference);
            m.max_cardinality();
            let theirs = m.solve();
            let theirs_cost: i64 = theirs
                .iter()
                .enumerate()
                .filter(|(u, &v)| v != mwmatching::SENTINEL && *u < v)
                .map(|(u, &v)| (pts[u].0 - pts[v].0).abs() + (pts[u].1 - pts[v].1).abs())
                .sum();
            assert_eq!(ours, theirs_cost, "round {round}");
        }
    }
}
