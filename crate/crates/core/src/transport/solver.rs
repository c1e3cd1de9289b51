//! Exact transportation solver: successive shortest paths with Johnson potentials on the
//! complete bipartite graph between supply and demand nodes.

use std::collections::BTreeMap;

/// Optimal integral flow with its dual certificate.
#[derive(Debug, Clone)]
pub(crate) struct Solution {
    /// Positive flows `(i, j, amount)`, sorted.
    pub flows: Vec<(usize, usize, u128)>,
    pub cost: u128,
    /// Duals with `u[i] + v[j] <= cost[i][j]`, tight on every positive flow.
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

const INF: i64 = i64::MAX / 4;

/// Minimizes `Σ flow(i,j)·cost[i*m + j]` subject to row sums `supply` and column sums `demand`.
/// The totals must agree.
pub(crate) fn solve(supply: &[u128], demand: &[u128], cost: &[u32]) -> Solution {
    let (k, m) = (supply.len(), demand.len());
    debug_assert_eq!(cost.len(), k * m);
    debug_assert_eq!(supply.iter().sum::<u128>(), demand.iter().sum::<u128>());

    // nodes: 0..k supply, k..k+m demand, s = k+m, t = k+m+1
    let (s, t) = (k + m, k + m + 1);
    let nodes = k + m + 2;
    let mut rem_supply = supply.to_vec();
    let mut rem_demand = demand.to_vec();
    // flow_at[j] holds the positive flows into demand node j, keyed by supply node
    let mut flow_at: Vec<BTreeMap<usize, u128>> = vec![BTreeMap::new(); m];
    let mut pot = vec![0i64; nodes];
    let mut dist = vec![INF; nodes];
    let mut done = vec![false; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let c = |i: usize, j: usize| i64::from(cost[i * m + j]);

    while rem_supply.iter().any(|&r| r > 0) {
        dist.fill(INF);
        done.fill(false);
        parent.fill(usize::MAX);
        dist[s] = 0;
        loop {
            // dense Dijkstra: the graph is complete between the two sides
            let mut u = usize::MAX;
            let mut best = INF;
            for (x, (&d, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && d < best {
                    best = d;
                    u = x;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            let relax = |to: usize, w: i64, dist: &mut [i64], parent: &mut [usize]| {
                let nd = best + w + pot[u] - pot[to];
                if nd < dist[to] {
                    dist[to] = nd;
                    parent[to] = u;
                }
            };
            if u == s {
                for i in (0..k).filter(|&i| rem_supply[i] > 0) {
                    relax(i, 0, &mut dist, &mut parent);
                }
            } else if u < k {
                for j in 0..m {
                    if !done[k + j] {
                        relax(k + j, c(u, j), &mut dist, &mut parent);
                    }
                }
            } else if u < k + m {
                let j = u - k;
                for &i in flow_at[j].keys() {
                    if !done[i] {
                        relax(i, -c(i, j), &mut dist, &mut parent);
                    }
                }
                if rem_demand[j] > 0 {
                    relax(t, 0, &mut dist, &mut parent);
                }
            } else if u == t {
                break;
            }
        }
        let dt = dist[t];
        assert!(dt < INF, "transportation problem is infeasible");
        for x in 0..nodes {
            pot[x] += dist[x].min(dt);
        }

        // path s -> i0 -> j0 -> i1 -> ... -> j_last -> t
        let mut path = vec![t];
        while *path.last().unwrap() != s {
            path.push(parent[*path.last().unwrap()]);
        }
        path.reverse();
        let first = path[1];
        let last = path[path.len() - 2] - k;
        let mut amount = rem_supply[first].min(rem_demand[last]);
        for pair in path[1..path.len() - 1].windows(2) {
            if pair[0] >= k {
                // backward arc demand -> supply
                amount = amount.min(flow_at[pair[0] - k][&pair[1]]);
            }
        }
        rem_supply[first] -= amount;
        rem_demand[last] -= amount;
        for pair in path[1..path.len() - 1].windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a < k {
                *flow_at[b - k].entry(a).or_insert(0) += amount;
            } else {
                let slot = flow_at[a - k].get_mut(&b).expect("backward arc has flow");
                *slot -= amount;
                if *slot == 0 {
                    flow_at[a - k].remove(&b);
                }
            }
        }
    }

    let mut flows: Vec<(usize, usize, u128)> = flow_at
        .iter()
        .enumerate()
        .flat_map(|(j, fl)| fl.iter().map(move |(&i, &f)| (i, j, f)))
        .collect();
    flows.sort_unstable();
    let cost_total = flows
        .iter()
        .map(|&(i, j, f)| f * u128::from(cost[i * m + j]))
        .sum();
    Solution {
        flows,
        cost: cost_total,
        u: pot[..k].iter().map(|&p| -p).collect(),
        v: pot[k..k + m].to_vec(),
    }
}

impl Solution {
    /// Checks primal feasibility, dual feasibility and complementary slackness.
    pub(crate) fn certify(&self, supply: &[u128], demand: &[u128], cost: &[u32]) -> bool {
        let m = demand.len();
        let mut rows = vec![0u128; supply.len()];
        let mut cols = vec![0u128; m];
        for &(i, j, f) in &self.flows {
            rows[i] += f;
            cols[j] += f;
            if self.u[i] + self.v[j] != i64::from(cost[i * m + j]) {
                return false;
            }
        }
        if rows != supply || cols != demand {
            return false;
        }
        (0..supply.len())
            .all(|i| (0..m).all(|j| self.u[i] + self.v[j] <= i64::from(cost[i * m + j])))
    }
}
