//! Defense and attack network structures.
//!
//! An edge `(u, v)` means `u` is an in-neighbor of `v`: in the defense graph a
//! blue `u` can cure `v`, in the attack graph a red `u` can compromise `v`.
//! Undirected graphs are stored as one canonical pair `(min, max)` per edge and
//! expose both arcs through [`Graph::in_neighbors`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix};

pub type Edge = (usize, usize);

/// Default number of wholesale resamples in [`generate_er`].
pub const ER_RETRY_LIMIT: usize = 100;

/// Largest `n` handled by the dense eigen path in [`spectrum_extremes`].
pub const DENSE_SPECTRUM_LIMIT: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("nodes with zero in-degree: {0:?}")]
    IsolatedNode(Vec<usize>),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("no valid graph after {0} attempts")]
    GenerationFailed(usize),
    #[error("cannot delete {requested} edges from a graph with {available}")]
    NotEnoughEdges { requested: usize, available: usize },
    #[error("cannot add {requested} edges, only {available} absent pairs")]
    NotEnoughNonEdges { requested: usize, available: usize },
    #[error("edge ({0}, {1}) is not in the graph")]
    EdgeNotPresent(usize, usize),
    #[error("edge ({0}, {1}) is already in the graph")]
    EdgeAlreadyPresent(usize, usize),
    #[error("graph file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: BTreeSet<Edge>,
    in_neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a simple graph, rejecting self-loops, duplicates and
    /// out-of-range endpoints. In-degrees are checked by [`Graph::validate`].
    pub fn from_edges(
        n: usize,
        directed: bool,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !set.insert(canonical(directed, (u, v))) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(Self::from_canonical(n, directed, set))
    }

    fn from_canonical(n: usize, directed: bool, edges: BTreeSet<Edge>) -> Self {
        let mut in_neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            in_neighbors[v].push(u);
            if !directed {
                in_neighbors[u].push(v);
            }
        }
        for list in &mut in_neighbors {
            list.sort_unstable();
        }
        Self {
            n,
            directed,
            edges,
            in_neighbors,
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_edges(n, false, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize, directed: bool) -> Self {
        Self::from_edges(n, directed, (0..n).map(|u| (u, (u + 1) % n)))
            .expect("cycle is simple for n >= 3")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of edges as listed (undirected edges count once).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.contains(&canonical(self.directed, e))
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_neighbors[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_neighbors[v].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_neighbors.iter().map(Vec::len).collect()
    }

    pub fn mean_in_degree(&self) -> f64 {
        let arcs: usize = self.in_neighbors.iter().map(Vec::len).sum();
        arcs as f64 / self.n as f64
    }

    /// Number of node pairs that could still carry an edge.
    pub fn absent_pair_count(&self) -> usize {
        let pairs = if self.directed {
            self.n * (self.n - 1)
        } else {
            self.n * (self.n - 1) / 2
        };
        pairs - self.edges.len()
    }

    /// Every node must have at least one in-neighbor, since the master
    /// equation averages over in-neighborhoods.
    pub fn validate(&self) -> Result<(), GraphError> {
        let isolated: Vec<usize> = (0..self.n)
            .filter(|&v| self.in_neighbors[v].is_empty())
            .collect();
        if isolated.is_empty() {
            Ok(())
        } else {
            Err(GraphError::IsolatedNode(isolated))
        }
    }

    pub fn row_normalized(&self) -> Result<RowStochastic, GraphError> {
        self.validate()?;
        Ok(RowStochastic {
            n: self.n,
            neighbors: self.in_neighbors.clone(),
        })
    }

    /// Applies an edge delta. The result is structurally simple but its
    /// in-degrees are not re-validated.
    pub fn apply_delta(&self, delta: &EdgeDelta) -> Result<Graph, GraphError> {
        let mut edges = self.edges.clone();
        for &e in &delta.removed {
            if !edges.remove(&canonical(self.directed, e)) {
                return Err(GraphError::EdgeNotPresent(e.0, e.1));
            }
        }
        for &(u, v) in &delta.added {
            if u >= self.n || v >= self.n {
                return Err(GraphError::NodeOutOfRange(u, v, self.n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !edges.insert(canonical(self.directed, (u, v))) {
                return Err(GraphError::EdgeAlreadyPresent(u, v));
            }
        }
        Ok(Self::from_canonical(self.n, self.directed, edges))
    }

    /// Parses the text format: a header `n <count> directed <0|1>` followed by
    /// one `u v` pair per line. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || GraphError::Parse {
            line: hline,
            message: format!("expected `n <count> directed <0|1>`, got `{header}`"),
        };
        if parts.len() != 4 || parts[0] != "n" || parts[2] != "directed" {
            return Err(bad_header());
        }
        let n: usize = parts[1].parse().map_err(|_| bad_header())?;
        let directed = match parts[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad_header()),
        };
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let mut next = || -> Result<usize, GraphError> {
                it.next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| GraphError::Parse {
                        line,
                        message: format!("expected `u v`, got `{l}`"),
                    })
            };
            let u = next()?;
            let v = next()?;
            if it.next().is_some() {
                return Err(GraphError::Parse {
                    line,
                    message: format!("trailing tokens in `{l}`"),
                });
            }
            edges.push((u, v));
        }
        Self::from_edges(n, directed, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {} directed {}\n", self.n, u8::from(self.directed));
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

fn canonical(directed: bool, (u, v): Edge) -> Edge {
    if directed || u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Sparse row-stochastic matrix `C = D⁻¹A`: row `v` puts weight
/// `1/deg(v)` on each in-neighbor of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochastic {
    n: usize,
    neighbors: Vec<Vec<usize>>,
}

impl RowStochastic {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let w = 1.0 / self.neighbors[v].len() as f64;
        self.neighbors[v].iter().map(move |&u| (u, w))
    }

    pub fn row_support(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Neighborhood average of `x` at node `v`.
    #[inline]
    pub fn average(&self, x: &[f64], v: usize) -> f64 {
        let nb = &self.neighbors[v];
        nb.iter().map(|&u| x[u]).sum::<f64>() / nb.len() as f64
    }

    /// `out = C x`, summing each row in neighbor order.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            *o = self.average(x, v);
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for v in 0..self.n {
            for (u, w) in self.row(v) {
                m[(v, u)] = w;
            }
        }
        m
    }
}

/// Edges removed from and added to a graph by [`perturb_edges`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeDelta {
    pub removed: Vec<Edge>,
    pub added: Vec<Edge>,
}

impl EdgeDelta {
    pub fn inverse(&self) -> EdgeDelta {
        EdgeDelta {
            removed: self.added.clone(),
            added: self.removed.clone(),
        }
    }
}

/// Seeded Erdős–Rényi graph; every unordered (undirected) or ordered
/// (directed) pair carries an edge independently with probability `p`.
/// Draws that leave a node without in-neighbors are discarded wholesale.
pub fn generate_er(n: usize, p: f64, directed: bool, seed: u64) -> Result<Graph, GraphError> {
    generate_er_with_retries(n, p, directed, seed, ER_RETRY_LIMIT)
}

pub fn generate_er_with_retries(
    n: usize,
    p: f64,
    directed: bool,
    seed: u64,
    retries: usize,
) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameters(format!("n = {n} < 2")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParameters(format!("p = {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..retries {
        let mut edges = BTreeSet::new();
        for u in 0..n {
            let start = if directed { 0 } else { u + 1 };
            for v in start..n {
                if u != v && rng.random_bool(p) {
                    edges.insert((u, v));
                }
            }
        }
        let g = Graph::from_canonical(n, directed, edges);
        if g.validate().is_ok() {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationFailed(retries))
}

/// Deletes `delete_count` edges chosen uniformly without replacement and adds
/// `add_count` pairs chosen uniformly among those absent from `g`.
pub fn perturb_edges(
    g: &Graph,
    delete_count: usize,
    add_count: usize,
    seed: u64,
) -> Result<(Graph, EdgeDelta), GraphError> {
    let current: Vec<Edge> = g.edges().collect();
    if delete_count > current.len() {
        return Err(GraphError::NotEnoughEdges {
            requested: delete_count,
            available: current.len(),
        });
    }
    let absent = g.absent_pair_count();
    if add_count > absent {
        return Err(GraphError::NotEnoughNonEdges {
            requested: add_count,
            available: absent,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, current.len(), delete_count).into_vec();
    picks.sort_unstable();
    let removed: Vec<Edge> = picks.into_iter().map(|i| current[i]).collect();

    let added = if add_count * 4 > absent {
        // Dense regime: enumerate the complement and sample from it.
        let pairs: Vec<Edge> = all_pairs(g.n, g.directed)
            .filter(|e| !g.edges.contains(e))
            .collect();
        let mut picks = index::sample(&mut rng, pairs.len(), add_count).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| pairs[i]).collect()
    } else {
        let mut chosen = BTreeSet::new();
        let mut order = Vec::with_capacity(add_count);
        while order.len() < add_count {
            let u = rng.random_range(0..g.n);
            let v = rng.random_range(0..g.n);
            if u == v {
                continue;
            }
            let e = canonical(g.directed, (u, v));
            if !g.edges.contains(&e) && chosen.insert(e) {
                order.push(e);
            }
        }
        order
    };

    let delta = EdgeDelta { removed, added };
    let out = g.apply_delta(&delta)?;
    out.validate()?;
    Ok((out, delta))
}

fn all_pairs(n: usize, directed: bool) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |u| {
        let start = if directed { 0 } else { u + 1 };
        (start..n).filter(move |&v| v != u).map(move |v| (u, v))
    })
}

/// Eigenvalues of `C` with the largest real part (`mu_max`, equal to 1 for
/// any row-stochastic matrix) and the smallest real part (`mu_min`).
pub fn spectrum_extremes(c: &RowStochastic) -> Result<(Complex64, Complex64), GraphError> {
    if c.size() <= DENSE_SPECTRUM_LIMIT {
        let vals = linalg::eigenvalues(&c.to_dense())?;
        let hi = linalg::leading_index(&vals).ok_or(LinalgError::EigenSolverFailure(0))?;
        let lo = linalg::trailing_index(&vals).ok_or(LinalgError::EigenSolverFailure(0))?;
        Ok((vals[hi], vals[lo]))
    } else {
        spectrum_extremes_iterative(c, 1e-10, 100_000)
    }
}

/// Power iteration on `C` for `mu_max` and on `2I − C` for `mu_min`. Only
/// converges when the dominant eigenvalue of each operator is real and
/// strictly dominant.
pub fn spectrum_extremes_iterative(
    c: &RowStochastic,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, Complex64), GraphError> {
    let n = c.size();
    let hi = power_iteration(n, |x, out| c.apply(x, out), tol, max_iter)
        .ok_or(LinalgError::EigenSolverFailure(n))?;
    let shifted = power_iteration(
        n,
        |x, out| {
            c.apply(x, out);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = 2.0 * xi - *o;
            }
        },
        tol,
        max_iter,
    )
    .ok_or(LinalgError::EigenSolverFailure(n))?;
    Ok((Complex64::new(hi, 0.0), Complex64::new(2.0 - shifted, 0.0)))
}

fn power_iteration(
    n: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    tol: f64,
    max_iter: usize,
) -> Option<f64> {
    // Deterministic start with no special alignment to the all-ones vector.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut last = f64::NAN;
    for _ in 0..max_iter {
        apply(&x, &mut y);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        if normalize(&mut x) == 0.0 {
            return Some(0.0);
        }
        if (rayleigh - last).abs() <= tol * (1.0 + rayleigh.abs()) {
            return Some(rayleigh);
        }
        last = rayleigh;
    }
    None
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k2() -> Graph {
        Graph::complete(2)
    }

    #[test]
    fn complete_graph_from_p_one() {
        let g = generate_er(4, 1.0, false, 99).unwrap();
        assert_eq!(g, Graph::complete(4));
        assert!(g.in_degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn p_zero_fails_generation() {
        assert_eq!(
            generate_er(4, 0.0, false, 1),
            Err(GraphError::GenerationFailed(ER_RETRY_LIMIT))
        );
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(matches!(
            generate_er(1, 0.5, false, 1),
            Err(GraphError::InvalidParameters(_))
        ));
        assert!(matches!(
            generate_er(5, 1.5, false, 1),
            Err(GraphError::InvalidParameters(_))
        ));
    }

    #[test]
    fn paper_scale_mean_degree() {
        let g = generate_er(2000, 0.005, false, 1).unwrap();
        // Binomial(1999, 0.005) mean 9.995; the sample mean over 2000 nodes
        // has sd ≈ 0.05, so [9, 11] is far beyond 3σ.
        let mean = g.mean_in_degree();
        assert!((9.0..=11.0).contains(&mean), "mean in-degree {mean}");
    }

    #[test]
    fn validation_cases() {
        assert!(Graph::complete(3).validate().is_ok());
        let g = Graph::from_edges(2, true, [(0, 1)]).unwrap();
        assert_eq!(g.validate(), Err(GraphError::IsolatedNode(vec![0])));
        let mut edges: Vec<Edge> = Graph::complete(3).edges().collect();
        edges.push((1, 1));
        assert_eq!(
            Graph::from_edges(3, false, edges),
            Err(GraphError::SelfLoop(1))
        );
        assert_eq!(
            Graph::from_edges(3, false, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert!(Graph::from_edges(3, true, [(0, 1), (1, 0)]).is_ok());
    }

    #[test]
    fn row_normalization_examples() {
        let c = k2().row_normalized().unwrap().to_dense();
        assert_eq!(c, Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));

        let c = Graph::complete(3).row_normalized().unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c[(i, j)], if i == j { 0.0 } else { 0.5 });
            }
        }

        // 0→1→2→0: node v's only in-neighbor is v−1.
        let c = Graph::cycle(3, true).row_normalized().unwrap().to_dense();
        let expect = Matrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert_eq!(c, expect);
    }

    #[test]
    fn spectrum_of_small_graphs() {
        let (hi, lo) = spectrum_extremes(&k2().row_normalized().unwrap()).unwrap();
        assert!((hi.re - 1.0).abs() < 1e-12 && (lo.re + 1.0).abs() < 1e-12);

        let c4 = Graph::cycle(4, false).row_normalized().unwrap();
        let vals = linalg::eigenvalues(&c4.to_dense()).unwrap();
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        // circulant spectrum cos(2πk/4)
        for (got, want) in re.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let (_, lo) = spectrum_extremes(&c4).unwrap();
        assert!((lo.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn iterative_spectrum_matches_dense_on_k3() {
        let c = Graph::complete(3).row_normalized().unwrap();
        let (hi, lo) = spectrum_extremes_iterative(&c, 1e-13, 10_000).unwrap();
        assert!((hi.re - 1.0).abs() < 1e-9);
        assert!((lo.re + 0.5).abs() < 1e-9);
    }

    #[test]
    fn perturb_examples() {
        let k3 = Graph::complete(3);
        let (g, delta) = perturb_edges(&k3, 1, 0, 5).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(delta.removed.len(), 1);
        assert!(delta.added.is_empty());

        assert_eq!(
            perturb_edges(&Graph::complete(4), 0, 1, 5),
            Err(GraphError::NotEnoughNonEdges {
                requested: 1,
                available: 0
            })
        );
        assert!(matches!(
            perturb_edges(&k3, 4, 0, 5),
            Err(GraphError::NotEnoughEdges { .. })
        ));
    }

    #[test]
    fn deleting_one_percent_of_a_paper_scale_graph() {
        let g = generate_er(2000, 0.005, false, 3).unwrap();
        let m = g.edge_count() / 100;
        let (a, da) = perturb_edges(&g, m, 0, 11).unwrap();
        let (b, db) = perturb_edges(&g, m, 0, 11).unwrap();
        assert_eq!(a.edge_count(), g.edge_count() - m);
        assert_eq!(a, b);
        assert_eq!(da, db);
    }

    #[test]
    fn stranding_a_node_is_reported() {
        // Path 0–1 plus edge 1–2: deleting both edges leaves isolated nodes.
        let g = Graph::from_edges(3, false, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            perturb_edges(&g, 2, 0, 0),
            Err(GraphError::IsolatedNode(_))
        ));
    }

    #[test]
    fn file_format_round_trip() {
        let g = generate_er(30, 0.2, true, 8).unwrap();
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
        let text = "n 3 directed 0\n0 1\n1 2\n2 0\n";
        assert_eq!(Graph::parse(text).unwrap(), Graph::complete(3));
        assert!(matches!(
            Graph::parse("n 3 undirected\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::parse("n 3 directed 0\n0 x\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rows_sum_to_one(n in 3usize..40, p in 0.2f64..0.9, directed: bool, seed: u64) {
            if let Ok(g) = generate_er(n, p, directed, seed) {
                let c = g.row_normalized().unwrap();
                for v in 0..n {
                    let s: f64 = c.row(v).map(|(_, w)| w).sum();
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                    prop_assert!(c.row(v).all(|(u, w)| (0.0..=1.0).contains(&w) && g.in_neighbors(v).contains(&u)));
                }
            }
        }

        #[test]
        fn perron_frobenius_and_gershgorin(n in 3usize..30, p in 0.2f64..0.9, directed: bool, seed: u64) {
            if let Ok(g) = generate_er(n, p, directed, seed) {
                let (hi, lo) = spectrum_extremes(&g.row_normalized().unwrap()).unwrap();
                prop_assert!((hi.re - 1.0).abs() <= 1e-8);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&lo.re));
            }
        }

        #[test]
        fn delta_reverses(n in 5usize..30, seed: u64, del in 0usize..4, add in 0usize..4) {
            if let Ok(g) = generate_er(n, 0.5, false, seed) {
                if let Ok((h, delta)) = perturb_edges(&g, del, add, seed ^ 1) {
                    let back = h.apply_delta(&delta.inverse()).unwrap();
                    prop_assert_eq!(back, g);
                }
            }
        }

        #[test]
        fn same_seed_same_graph(seed: u64, directed: bool) {
            let a = generate_er(40, 0.1, directed, seed);
            let b = generate_er(40, 0.1, directed, seed);
            prop_assert_eq!(a, b);
        }
    }
}
