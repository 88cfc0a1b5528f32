//! Device connectivity and valid (connected) qubit groups.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{QgoError, Result};

/// Undirected coupling graph over physical qubits `0..num_qubits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Deserialize, Serialize)]
struct TopologyJson {
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl Topology {
    /// Builds a topology, rejecting self-loops, duplicates and out-of-range
    /// endpoints. Edges are stored as sorted `(min, max)` pairs.
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(QgoError::Topology(format!(
                    "edge ({a}, {b}) out of range for {num_qubits} qubits"
                )));
            }
            if a == b {
                return Err(QgoError::Topology(format!("self-loop on qubit {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(QgoError::Topology(format!("duplicate edge ({a}, {b})")));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(Topology {
            num_qubits,
            edges,
            adj,
        })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("valid line")
    }

    /// `rows x cols` grid numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        Self::new(rows * cols, edges).expect("valid grid")
    }

    /// Every pair connected.
    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Sorted `(min, max)` pairs; the position in this list is the edge index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adj[a].binary_search(&b).is_ok()
    }

    /// Induced subgraph on qubits `0..n`.
    pub fn restrict(&self, n: usize) -> Topology {
        let n = n.min(self.num_qubits);
        Topology::new(
            n,
            self.edges.iter().copied().filter(|&(a, b)| a < n && b < n),
        )
        .expect("subgraph of a valid topology")
    }

    /// True iff the induced subgraph on `qubits` is connected. The empty set
    /// is not a group and returns false.
    pub fn is_valid_group(&self, qubits: &[usize]) -> bool {
        let Some(&start) = qubits.first() else {
            return false;
        };
        if qubits.iter().any(|&q| q >= self.num_qubits) {
            return false;
        }
        let mut seen = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for &n in &self.adj[q] {
                if qubits.contains(&n) && !seen.contains(&n) {
                    seen.push(n);
                    queue.push_back(n);
                }
            }
        }
        let mut distinct = qubits.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        seen.len() == distinct.len()
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.num_qubits];
        let mut out = Vec::new();
        for s in 0..self.num_qubits {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let q = members[i];
                for &n in &self.adj[q] {
                    if comp[n] == usize::MAX {
                        comp[n] = id;
                        members.push(n);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn largest_component(&self) -> usize {
        self.components().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// All-pairs hop distances (`usize::MAX` when unreachable).
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.num_qubits)
            .map(|s| {
                let mut dist = vec![usize::MAX; self.num_qubits];
                dist[s] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(q) = queue.pop_front() {
                    for &n in &self.adj[q] {
                        if dist[n] == usize::MAX {
                            dist[n] = dist[q] + 1;
                            queue.push_back(n);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    /// All connected `k`-subsets, each once, in lexicographic order.
    ///
    /// Each subset is grown from its smallest vertex: starting at `v`, only
    /// neighbours larger than `v` may join, and an extension set tracks which
    /// vertices can still be added without producing a duplicate.
    pub fn enumerate_valid_groups(&self, k: usize) -> Vec<QubitGroup> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        if k == 0 || k > self.num_qubits {
            return Vec::new();
        }
        for v in 0..self.num_qubits {
            let ext: Vec<usize> = self.adj[v].iter().copied().filter(|&u| u > v).collect();
            let mut sub = vec![v];
            let mut excluded = vec![false; self.num_qubits];
            excluded[v] = true;
            for &u in &ext {
                excluded[u] = true;
            }
            self.extend(v, k, &mut sub, ext, &mut excluded, &mut out);
        }
        let mut groups: Vec<QubitGroup> = out.into_iter().map(QubitGroup::new).collect();
        groups.sort();
        groups
    }

    // ESU-style extension: `ext` holds candidates; `blocked` marks vertices
    // already in the subgraph, its neighbourhood, or already considered.
    fn extend(
        &self,
        root: usize,
        k: usize,
        sub: &mut Vec<usize>,
        mut ext: Vec<usize>,
        blocked: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if sub.len() == k {
            out.push(sub.clone());
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next_ext = ext.clone();
            let mut newly = Vec::new();
            for &u in &self.adj[w] {
                if u > root && !blocked[u] {
                    blocked[u] = true;
                    newly.push(u);
                    next_ext.push(u);
                }
            }
            sub.push(w);
            self.extend(root, k, sub, next_ext, blocked, out);
            sub.pop();
            for u in newly {
                blocked[u] = false;
            }
        }
    }
}

/// Parses `line-N`, `grid-RxC`, or a JSON document
/// `{"num_qubits": n, "edges": [[a, b], ...]}`.
pub fn load_topology(spec: &str) -> Result<Topology> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        let doc: TopologyJson = serde_json::from_str(spec)
            .map_err(|e| QgoError::Topology(format!("malformed JSON: {e}")))?;
        return Topology::new(doc.num_qubits, doc.edges.into_iter().map(|[a, b]| (a, b)));
    }
    let bad = || QgoError::Topology(format!("unrecognized topology `{spec}`"));
    if let Some(n) = spec.strip_prefix("line-") {
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        return Ok(Topology::line(n));
    }
    if let Some(dims) = spec.strip_prefix("grid-") {
        let (r, c) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
        let r: usize = r.parse().map_err(|_| bad())?;
        let c: usize = c.parse().map_err(|_| bad())?;
        if r == 0 || c == 0 {
            return Err(bad());
        }
        return Ok(Topology::grid(r, c));
    }
    Err(bad())
}

/// Serializes to the JSON form accepted by [`load_topology`].
pub fn topology_to_json(t: &Topology) -> String {
    serde_json::to_string(&TopologyJson {
        num_qubits: t.num_qubits,
        edges: t.edges.iter().map(|&(a, b)| [a, b]).collect(),
    })
    .expect("serializable")
}

/// A sorted set of distinct physical qubits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitGroup(Vec<usize>);

impl QubitGroup {
    pub fn new(mut qubits: Vec<usize>) -> Self {
        qubits.sort_unstable();
        qubits.dedup();
        QubitGroup(qubits)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    /// Sorted position of `q` within the group.
    pub fn position(&self, q: usize) -> Option<usize> {
        self.0.binary_search(&q).ok()
    }

    /// Edges of the induced subgraph in local (position) coordinates.
    pub fn local_edges(&self, t: &Topology) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in self.0.iter().enumerate().skip(i + 1) {
                if t.has_edge(a, b) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(t: &Topology, k: usize) -> Vec<Vec<usize>> {
        t.enumerate_valid_groups(k)
            .into_iter()
            .map(|g| g.qubits().to_vec())
            .collect()
    }

    /// Brute force: every k-subset filtered by connectivity, in lex order.
    fn brute_force(t: &Topology, k: usize) -> Vec<Vec<usize>> {
        let n = t.num_qubits();
        let mut out = Vec::new();
        let mut combo: Vec<usize> = (0..k).collect();
        if k == 0 || k > n {
            return out;
        }
        loop {
            if t.is_valid_group(&combo) {
                out.push(combo.clone());
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if combo[i] < n - k + i {
                    combo[i] += 1;
                    for j in i + 1..k {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn line_preset() {
        let t = load_topology("line-5").unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn grid_preset() {
        let t = load_topology("grid-3x3").unwrap();
        assert_eq!(t.edges().len(), 12);
        assert!(t.has_edge(0, 3));
        assert!(t.has_edge(3, 6));
        assert!(t.has_edge(2, 5));
        assert!(t.has_edge(5, 8));
        assert!(!t.has_edge(2, 7));
        assert!(t.has_edge(7, 8));
    }

    #[test]
    fn json_topology() {
        let t = load_topology(r#"{"num_qubits": 3, "edges": [[0,1],[2,1]]}"#).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(load_topology(&topology_to_json(&t)).unwrap(), t);
        assert!(load_topology(r#"{"num_qubits": 5, "edges": [[0,9]]}"#).is_err());
        assert!(load_topology(r#"{"num_qubits": 5, "edges": [[0,1],[1,0]]}"#).is_err());
        assert!(load_topology(r#"{"num_qubits": 5, "edges": [[2,2]]}"#).is_err());
        assert!(load_topology("ring-5").is_err());
        assert!(load_topology("grid-3").is_err());
        assert!(load_topology("{nope").is_err());
    }

    #[test]
    fn valid_groups_on_grid() {
        let t = Topology::grid(3, 3);
        assert!(t.is_valid_group(&[0, 3, 6]));
        assert!(!t.is_valid_group(&[2, 7, 8]));
        assert!(t.is_valid_group(&[0]));
        assert!(t.is_valid_group(&[4]));
    }

    #[test]
    fn line5_k3() {
        let t = Topology::line(5);
        assert_eq!(
            groups(&t, 3),
            vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]]
        );
        assert_eq!(groups(&t, 3), brute_force(&t, 3));
    }

    #[test]
    fn grid_pairs_are_edges() {
        let t = Topology::grid(3, 3);
        let pairs: Vec<(usize, usize)> = groups(&t, 2).into_iter().map(|g| (g[0], g[1])).collect();
        assert_eq!(pairs, t.edges());
    }

    #[test]
    fn whole_line() {
        assert_eq!(groups(&Topology::line(4), 4), vec![vec![0, 1, 2, 3]]);
        assert!(groups(&Topology::line(4), 5).is_empty());
        let split = Topology::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        assert!(groups(&split, 4).is_empty());
        assert_eq!(split.largest_component(), 3);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(1..=10);
            let p = rng.gen_range(0.1..0.7);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((a, b));
                    }
                }
            }
            let t = Topology::new(n, edges).unwrap();
            for k in 1..=4 {
                assert_eq!(
                    groups(&t, k),
                    brute_force(&t, k),
                    "n={n} k={k} {:?}",
                    t.edges()
                );
            }
        }
    }

    #[test]
    fn restrict_and_distances() {
        let t = Topology::grid(2, 3);
        let r = t.restrict(4);
        assert_eq!(r.edges(), &[(0, 1), (0, 3), (1, 2)]);
        let d = t.distance_matrix();
        assert_eq!(d[0][5], 3);
        assert_eq!(d[2][3], 3);
    }

    #[test]
    fn local_edges_of_group() {
        let t = Topology::grid(3, 3);
        let g = QubitGroup::new(vec![4, 1, 3]);
        assert_eq!(g.qubits(), &[1, 3, 4]);
        assert_eq!(g.local_edges(&t), vec![(0, 2), (1, 2)]);
    }
}
