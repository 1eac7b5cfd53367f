//! Control-flow-graph features for a class: per-method graph metrics
//! aggregated over all methods, plus cyclomatic complexity summaries.
//!
//! Distance and connectivity metrics use the undirected simple view of each
//! graph. Cyclomatic complexity uses the directed simple view
//! (`E - N + 2`). Self-loops and repeated edges are dropped.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Residual bound accepted from the Laplacian eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgGraph {
    pub method_id: String,
    pub node_count: usize,
    /// Directed edges, normalized: no self-loops, no repeats, sorted.
    edges: Vec<(usize, usize)>,
}

impl CfgGraph {
    pub fn new(method_id: impl Into<String>, node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let method_id = method_id.into();
        if node_count == 0 {
            return Err(Error::Graph {
                method: method_id,
                message: "node count must be at least 1".into(),
            });
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::Graph {
                    method: method_id,
                    message: format!("edge ({u}, {v}) references a node outside [0, {node_count})"),
                });
            }
            if u != v {
                set.insert((u, v));
            }
        }
        Ok(Self {
            method_id,
            node_count,
            edges: set.into_iter().collect(),
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `E - N + 2` on the directed simple graph.
    pub fn cyclomatic_complexity(&self) -> f64 {
        self.edges.len() as f64 - self.node_count as f64 + 2.0
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![BTreeSet::new(); self.node_count];
        for &(u, v) in &self.edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }
}

/// Metrics of a single method graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodMetrics {
    pub vertices: f64,
    pub edges: f64,
    pub radius: f64,
    pub diameter: f64,
    pub center_size: f64,
    pub periphery_size: f64,
    pub avg_shortest_path: f64,
    pub algebraic_connectivity: f64,
    pub avg_degree: f64,
    pub density: f64,
    pub vertex_connectivity: f64,
    pub edge_connectivity: f64,
    pub transitivity: f64,
    pub cyclomatic: f64,
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        let comp: Vec<usize> = bfs(adj, s)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect();
        for &v in &comp {
            seen[v] = true;
        }
        out.push(comp);
    }
    out
}

/// Unit-capacity max flow on a directed graph given as capacity lists, by
/// repeated BFS augmentation. `limit` stops early once reached.
struct FlowNet {
    cap: Vec<HashMap<usize, i32>>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        Self {
            cap: vec![HashMap::new(); n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: i32) {
        *self.cap[u].entry(v).or_insert(0) += c;
        self.cap[v].entry(u).or_insert(0);
    }

    fn max_flow(mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.cap.len();
        let mut flow = 0;
        while flow < limit {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                let mut next: Vec<usize> = self.cap[u].iter().filter(|&(_, &c)| c > 0).map(|(&v, _)| v).collect();
                next.sort_unstable();
                for v in next {
                    if prev[v] == usize::MAX {
                        prev[v] = u;
                        q.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                break;
            }
            let mut v = t;
            while v != s {
                let u = prev[v];
                *self.cap[u].get_mut(&v).unwrap() -= 1;
                *self.cap[v].get_mut(&u).unwrap() += 1;
                v = u;
            }
            flow += 1;
        }
        flow
    }
}

/// Number of internally vertex-disjoint paths between non-adjacent `s`, `t`.
fn local_vertex_connectivity(adj: &[Vec<usize>], s: usize, t: usize) -> usize {
    let n = adj.len();
    // node v -> (in = 2v, out = 2v + 1)
    let mut net = FlowNet::new(2 * n);
    let big = n as i32;
    for (v, nbrs) in adj.iter().enumerate() {
        let c = if v == s || v == t { big } else { 1 };
        net.add(2 * v, 2 * v + 1, c);
        for &w in nbrs {
            net.add(2 * v + 1, 2 * w, big);
        }
    }
    net.max_flow(2 * s + 1, 2 * t, n)
}

fn vertex_connectivity(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    if n <= 1 {
        return 0;
    }
    let complete = adj.iter().all(|a| a.len() == n - 1);
    if complete {
        return n - 1;
    }
    // Esfahanian-Hakimi: a minimum-degree vertex is either outside some
    // minimum separator or all of its neighbours are.
    let v = (0..n).min_by_key(|&u| adj[u].len()).unwrap();
    let mut best = adj[v].len();
    let nbrs: BTreeSet<usize> = adj[v].iter().copied().collect();
    for w in 0..n {
        if w != v && !nbrs.contains(&w) {
            best = best.min(local_vertex_connectivity(adj, v, w));
        }
    }
    let nb: Vec<usize> = nbrs.iter().copied().collect();
    for (a, &x) in nb.iter().enumerate() {
        for &y in &nb[a + 1..] {
            if !adj[x].contains(&y) {
                best = best.min(local_vertex_connectivity(adj, x, y));
            }
        }
    }
    best
}

fn edge_connectivity(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    if n <= 1 {
        return 0;
    }
    let min_deg = adj.iter().map(Vec::len).min().unwrap();
    let mut best = min_deg;
    for t in 1..n {
        let mut net = FlowNet::new(n);
        for (u, a) in adj.iter().enumerate() {
            for &w in a {
                net.add(u, w, 1);
            }
        }
        best = best.min(net.max_flow(0, t, best));
    }
    best
}

fn transitivity(adj: &[Vec<usize>]) -> f64 {
    let mut triangles = 0usize;
    let mut triples = 0usize;
    for a in adj {
        let d = a.len();
        triples += d * d.saturating_sub(1) / 2;
        for (k, &v) in a.iter().enumerate() {
            for &w in &a[k + 1..] {
                if adj[v].binary_search(&w).is_ok() {
                    triangles += 1;
                }
            }
        }
    }
    // every triangle was counted once at each of its three corners
    if triples == 0 {
        0.0
    } else {
        triangles as f64 / triples as f64
    }
}

fn algebraic_connectivity(adj: &[Vec<usize>], method: &str) -> Result<f64> {
    let n = adj.len();
    if n < 2 {
        return Ok(0.0);
    }
    let lap = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            adj[r].len() as f64
        } else if adj[r].binary_search(&c).is_ok() {
            -1.0
        } else {
            0.0
        }
    });
    let eig = lap.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[1];
    let lambda = eig.eigenvalues[k];
    let vec = eig.eigenvectors.column(k);
    let residual = (&lap * vec - vec * lambda).norm();
    let scale = lap.norm().max(1.0);
    if residual > EIGEN_RESIDUAL_TOL * scale {
        return Err(Error::Graph {
            method: method.to_string(),
            message: format!("Laplacian eigen-solve residual {residual:e} exceeds tolerance"),
        });
    }
    Ok(lambda.max(0.0))
}

/// Computes all per-method metrics. Fails when the undirected view is
/// disconnected. A single-node graph has every distance and connectivity
/// metric equal to zero.
pub fn method_metrics(g: &CfgGraph) -> Result<MethodMetrics> {
    let adj = g.undirected_adjacency();
    let n = g.node_count;
    let comps = components(&adj);
    if comps.len() > 1 {
        let desc: Vec<String> = comps.iter().map(|c| format!("{c:?}")).collect();
        return Err(Error::Graph {
            method: g.method_id.clone(),
            message: format!("graph is disconnected; components: {}", desc.join(" ")),
        });
    }
    let und_edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;

    let mut ecc = vec![0usize; n];
    let mut dist_sum = 0usize;
    for (s, e) in ecc.iter_mut().enumerate() {
        for x in bfs(&adj, s).iter().flatten() {
            dist_sum += x;
            *e = (*e).max(*x);
        }
    }
    let radius = *ecc.iter().min().unwrap();
    let diameter = *ecc.iter().max().unwrap();
    let center = ecc.iter().filter(|&&e| e == radius).count();
    let periphery = ecc.iter().filter(|&&e| e == diameter).count();
    let pairs = n * (n - 1);
    let avg_spl = if pairs == 0 {
        0.0
    } else {
        dist_sum as f64 / pairs as f64
    };
    let density = if pairs == 0 {
        0.0
    } else {
        und_edges as f64 / (pairs as f64 / 2.0)
    };

    Ok(MethodMetrics {
        vertices: n as f64,
        edges: g.edges.len() as f64,
        radius: radius as f64,
        diameter: diameter as f64,
        center_size: center as f64,
        periphery_size: periphery as f64,
        avg_shortest_path: avg_spl,
        algebraic_connectivity: algebraic_connectivity(&adj, &g.method_id)?,
        avg_degree: 2.0 * und_edges as f64 / n as f64,
        density,
        vertex_connectivity: vertex_connectivity(&adj) as f64,
        edge_connectivity: edge_connectivity(&adj) as f64,
        transitivity: transitivity(&adj),
        cyclomatic: g.cyclomatic_complexity(),
    })
}

/// Class-level feature vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCfgFeatures {
    pub avg_vertices: f64,
    pub min_vertices: f64,
    pub max_vertices: f64,
    pub avg_edges: f64,
    pub min_edges: f64,
    pub max_edges: f64,
    pub avg_rad: f64,
    pub avg_diam: f64,
    pub avg_center: f64,
    pub avg_periphery: f64,
    pub avg_spl: f64,
    pub alg_conn: f64,
    pub avg_degree: f64,
    pub std_degree: f64,
    pub avg_density: f64,
    pub vertex_conn: f64,
    pub avg_edge_conn: f64,
    pub transitivity: f64,
    pub per_cc10: f64,
    pub avg_cc: f64,
    pub std_cc: f64,
}

impl ClassCfgFeatures {
    pub const NAMES: [&'static str; 21] = [
        "avg_vertices",
        "min_vertices",
        "max_vertices",
        "avg_edges",
        "min_edges",
        "max_edges",
        "avg_rad",
        "avg_diam",
        "avg_center",
        "avg_periphery",
        "avg_spl",
        "alg_conn",
        "avg_degree",
        "std_degree",
        "avg_density",
        "vertex_conn",
        "avg_edge_conn",
        "transitivity",
        "per_cc10",
        "avg_cc",
        "std_cc",
    ];

    pub fn values(&self) -> [f64; 21] {
        [
            self.avg_vertices,
            self.min_vertices,
            self.max_vertices,
            self.avg_edges,
            self.min_edges,
            self.max_edges,
            self.avg_rad,
            self.avg_diam,
            self.avg_center,
            self.avg_periphery,
            self.avg_spl,
            self.alg_conn,
            self.avg_degree,
            self.std_degree,
            self.avg_density,
            self.vertex_conn,
            self.avg_edge_conn,
            self.transitivity,
            self.per_cc10,
            self.avg_cc,
            self.std_cc,
        ]
    }
}

/// `(avg_cc, std_cc, per_cc10)` of a list of method complexities.
pub fn cc_summary(cc: &[f64]) -> (f64, f64, f64) {
    let over = cc.iter().filter(|&&c| c > 10.0).count();
    let per = if cc.is_empty() {
        0.0
    } else {
        100.0 * over as f64 / cc.len() as f64
    };
    (stats::mean(cc), stats::std_pop(cc), per)
}

pub fn class_features(methods: &[CfgGraph]) -> Result<ClassCfgFeatures> {
    let cc: Vec<f64> = methods.iter().map(CfgGraph::cyclomatic_complexity).collect();
    class_features_with_cc(methods, &cc)
}

/// Like [`class_features`] but with externally supplied per-method
/// complexities.
pub fn class_features_with_cc(methods: &[CfgGraph], method_cc: &[f64]) -> Result<ClassCfgFeatures> {
    if methods.is_empty() {
        return Err(Error::Graph {
            method: "<class>".into(),
            message: "class has no methods".into(),
        });
    }
    if method_cc.len() != methods.len() {
        return Err(Error::Graph {
            method: "<class>".into(),
            message: format!(
                "{} complexities supplied for {} methods",
                method_cc.len(),
                methods.len()
            ),
        });
    }
    let per: Vec<MethodMetrics> = methods.iter().map(method_metrics).collect::<Result<_>>()?;
    let col = |f: fn(&MethodMetrics) -> f64| per.iter().map(f).collect::<Vec<f64>>();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let verts = col(|m| m.vertices);
    let edges = col(|m| m.edges);
    let degrees = col(|m| m.avg_degree);
    let (avg_cc, std_cc, per_cc10) = cc_summary(method_cc);
    Ok(ClassCfgFeatures {
        avg_vertices: stats::mean(&verts),
        min_vertices: min(&verts),
        max_vertices: max(&verts),
        avg_edges: stats::mean(&edges),
        min_edges: min(&edges),
        max_edges: max(&edges),
        avg_rad: stats::mean(&col(|m| m.radius)),
        avg_diam: stats::mean(&col(|m| m.diameter)),
        avg_center: stats::mean(&col(|m| m.center_size)),
        avg_periphery: stats::mean(&col(|m| m.periphery_size)),
        avg_spl: stats::mean(&col(|m| m.avg_shortest_path)),
        alg_conn: stats::mean(&col(|m| m.algebraic_connectivity)),
        avg_degree: stats::mean(&degrees),
        std_degree: stats::std_pop(&degrees),
        avg_density: stats::mean(&col(|m| m.density)),
        vertex_conn: stats::mean(&col(|m| m.vertex_connectivity)),
        avg_edge_conn: stats::mean(&col(|m| m.edge_connectivity)),
        transitivity: stats::mean(&col(|m| m.transitivity)),
        per_cc10,
        avg_cc,
        std_cc,
    })
}

#[derive(Debug, Deserialize, Serialize)]
struct MethodDoc {
    id: String,
    n: usize,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Deserialize, Serialize)]
struct ClassDoc {
    class: String,
    methods: Vec<MethodDoc>,
}

/// A class and its method graphs as read from a graph document.
#[derive(Debug, Clone)]
pub struct ClassGraphs {
    pub class: String,
    pub methods: Vec<CfgGraph>,
}

/// Parses `{"class": .., "methods": [{"id": .., "n": .., "edges": [[u, v], ..]}]}`.
pub fn parse_class_graphs(text: &str) -> Result<ClassGraphs> {
    let doc: ClassDoc = serde_json::from_str(text)?;
    let methods = doc
        .methods
        .iter()
        .map(|m| {
            let edges: Vec<(usize, usize)> = m.edges.iter().map(|e| (e[0], e[1])).collect();
            CfgGraph::new(m.id.clone(), m.n, &edges)
        })
        .collect::<Result<_>>()?;
    Ok(ClassGraphs {
        class: doc.class,
        methods,
    })
}

pub fn load_class_graphs(path: &Path) -> Result<ClassGraphs> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_class_graphs(&text)
}

/// Renders class feature rows as `instance,feature_<name>,...` CSV.
pub fn write_features_csv(rows: &[(String, ClassCfgFeatures)], header_comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = header_comment {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance".to_string()];
    header.extend(ClassCfgFeatures::NAMES.iter().map(|n| format!("feature_{n}")));
    w.write_record(&header).expect("in-memory write");
    for (class, f) in rows {
        let mut rec = vec![class.clone()];
        rec.extend(f.values().iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p3() -> CfgGraph {
        CfgGraph::new("p3", 3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn k3() -> CfgGraph {
        CfgGraph::new("k3", 3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn complete(n: usize) -> CfgGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        CfgGraph::new(format!("k{n}"), n, &e).unwrap()
    }

    #[test]
    fn path_of_three() {
        let m = method_metrics(&p3()).unwrap();
        assert_eq!(m.radius, 1.0);
        assert_eq!(m.diameter, 2.0);
        assert_eq!(m.center_size, 1.0);
        assert_eq!(m.periphery_size, 2.0);
        assert_abs_diff_eq!(m.avg_shortest_path, 8.0 / 6.0, epsilon = 1e-12);
        assert_eq!(m.cyclomatic, 1.0);
        // Laplacian of P3 has characteristic polynomial x(x-1)(x-3)
        assert_abs_diff_eq!(m.algebraic_connectivity, 1.0, epsilon = 1e-9);
        assert_eq!(m.vertex_connectivity, 1.0);
        assert_eq!(m.edge_connectivity, 1.0);
        assert_eq!(m.transitivity, 0.0);
    }

    #[test]
    fn triangle() {
        let m = method_metrics(&k3()).unwrap();
        assert_eq!((m.radius, m.diameter), (1.0, 1.0));
        assert_eq!(m.transitivity, 1.0);
        assert_eq!(m.density, 1.0);
        assert_eq!(m.cyclomatic, 2.0);
        // Laplacian of K3 has characteristic polynomial x(x-3)^2
        assert_abs_diff_eq!(m.algebraic_connectivity, 3.0, epsilon = 1e-9);
        assert_eq!(m.vertex_connectivity, 2.0);
        assert_eq!(m.edge_connectivity, 2.0);
    }

    #[test]
    fn diamond_cc_is_two() {
        let g = CfgGraph::new("if", 4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(g.cyclomatic_complexity(), 2.0);
        let m = method_metrics(&g).unwrap();
        assert_eq!(m.vertex_connectivity, 2.0);
    }

    #[test]
    fn cut_vertex_and_bridge() {
        // two triangles sharing vertex 2
        let g = CfgGraph::new("bow", 5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        let m = method_metrics(&g).unwrap();
        assert_eq!(m.vertex_connectivity, 1.0);
        assert_eq!(m.edge_connectivity, 2.0);
        // triangles joined by a bridge
        let g = CfgGraph::new("bridge", 6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
        let m = method_metrics(&g).unwrap();
        assert_eq!(m.edge_connectivity, 1.0);
    }

    #[test]
    fn single_node_conventions() {
        let m = method_metrics(&CfgGraph::new("one", 1, &[]).unwrap()).unwrap();
        assert_eq!(m.radius, 0.0);
        assert_eq!(m.diameter, 0.0);
        assert_eq!(m.avg_shortest_path, 0.0);
        assert_eq!(m.algebraic_connectivity, 0.0);
        assert_eq!(m.vertex_connectivity, 0.0);
        assert_eq!(m.edge_connectivity, 0.0);
        assert_eq!(m.cyclomatic, 1.0);
    }

    #[test]
    fn disconnected_is_error() {
        let g = CfgGraph::new("split", 4, &[(0, 1), (2, 3)]).unwrap();
        let err = method_metrics(&g).unwrap_err().to_string();
        assert!(err.contains("[0, 1]") && err.contains("[2, 3]"), "{err}");
    }

    #[test]
    fn normalization_drops_loops_and_repeats() {
        let g = CfgGraph::new("m", 2, &[(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert!(CfgGraph::new("m", 2, &[(0, 2)]).is_err());
        assert!(CfgGraph::new("m", 0, &[]).is_err());
    }

    #[test]
    fn cc_percentage() {
        let (avg, _, per) = cc_summary(&[12.0, 3.0, 5.0, 11.0]);
        assert_eq!(per, 50.0);
        assert_eq!(avg, 7.75);
        let graphs = vec![p3(); 4];
        let f = class_features_with_cc(&graphs, &[12.0, 3.0, 5.0, 11.0]).unwrap();
        assert_eq!(f.per_cc10, 50.0);
        assert_eq!(f.avg_cc, 7.75);
    }

    #[test]
    fn single_method_aggregation() {
        let f = class_features(&[k3()]).unwrap();
        assert_eq!(f.avg_vertices, f.min_vertices);
        assert_eq!(f.avg_vertices, f.max_vertices);
        assert_eq!(f.avg_edges, f.min_edges);
        assert_eq!(f.std_cc, 0.0);
        assert!(class_features(&[]).is_err());
    }

    #[test]
    fn duplicate_methods_average_to_method() {
        let m = method_metrics(&p3()).unwrap();
        let f = class_features(&[p3(), p3()]).unwrap();
        assert_eq!(f.avg_rad, m.radius);
        assert_eq!(f.avg_diam, m.diameter);
        assert_eq!(f.avg_spl, m.avg_shortest_path);
        assert_eq!(f.alg_conn, m.algebraic_connectivity);
        assert_eq!(f.avg_density, m.density);
        assert_eq!(f.std_degree, 0.0);
    }

    #[test]
    fn complete_graphs_are_dense_and_transitive() {
        for n in 3..9 {
            let m = method_metrics(&complete(n)).unwrap();
            assert_eq!(m.transitivity, 1.0);
            assert_eq!(m.density, 1.0);
            assert_eq!(m.vertex_connectivity, (n - 1) as f64);
            assert_eq!(m.edge_connectivity, (n - 1) as f64);
            assert_abs_diff_eq!(m.algebraic_connectivity, n as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn parses_graph_document() {
        let doc =
            r#"{"class":"pkg.A","methods":[{"id":"m1","n":3,"edges":[[0,1],[1,2]]},{"id":"m2","n":1,"edges":[]}]}"#;
        let cg = parse_class_graphs(doc).unwrap();
        assert_eq!(cg.class, "pkg.A");
        assert_eq!(cg.methods.len(), 2);
        assert!(parse_class_graphs(r#"{"class":"x","methods":[{"id":"m","n":2,"edges":[[0,5]]}]}"#).is_err());
        let csv = write_features_csv(&[("pkg.A".into(), class_features(&cg.methods).unwrap())], None);
        assert!(csv.starts_with("instance,feature_avg_vertices,"));
    }

    fn connected_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..9).prop_flat_map(|n| {
            // random spanning tree plus extra edges
            let tree = proptest::collection::vec(any::<proptest::sample::Index>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..12);
            (Just(n), tree, extra).prop_map(|(n, tree, extra)| {
                let mut e: Vec<(usize, usize)> = tree
                    .iter()
                    .enumerate()
                    .map(|(k, ix)| (ix.index(k + 1), k + 1))
                    .collect();
                e.extend(extra);
                (n, e)
            })
        })
    }

    proptest! {
        #[test]
        fn relabeling_is_invariant((n, edges) in connected_graph(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let relabeled: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            let a = method_metrics(&CfgGraph::new("a", n, &edges).unwrap()).unwrap();
            let b = method_metrics(&CfgGraph::new("b", n, &relabeled).unwrap()).unwrap();
            prop_assert_eq!(a.radius, b.radius);
            prop_assert_eq!(a.diameter, b.diameter);
            prop_assert_eq!(a.center_size, b.center_size);
            prop_assert_eq!(a.periphery_size, b.periphery_size);
            prop_assert!((a.avg_shortest_path - b.avg_shortest_path).abs() < 1e-12);
            prop_assert!((a.algebraic_connectivity - b.algebraic_connectivity).abs() < 1e-8);
            prop_assert_eq!(a.vertex_connectivity, b.vertex_connectivity);
            prop_assert_eq!(a.edge_connectivity, b.edge_connectivity);
            prop_assert!((a.transitivity - b.transitivity).abs() < 1e-12);
            prop_assert_eq!(a.cyclomatic, b.cyclomatic);
        }

        #[test]
        fn adding_edge_never_lengthens((n, edges) in connected_graph(), u in 0usize..9, v in 0usize..9) {
            let (u, v) = (u % n, v % n);
            let before = method_metrics(&CfgGraph::new("a", n, &edges).unwrap()).unwrap();
            let mut more = edges.clone();
            more.push((u, v));
            let after = method_metrics(&CfgGraph::new("b", n, &more).unwrap()).unwrap();
            prop_assert!(after.radius <= before.radius);
            prop_assert!(after.diameter <= before.diameter);
            prop_assert!(after.avg_shortest_path <= before.avg_shortest_path + 1e-12);
        }

        #[test]
        fn metric_ranges((n, edges) in connected_graph()) {
            let m = method_metrics(&CfgGraph::new("a", n, &edges).unwrap()).unwrap();
            prop_assert!(m.radius <= m.diameter);
            prop_assert!((0.0..=1.0).contains(&m.density));
            prop_assert!((0.0..=1.0).contains(&m.transitivity));
            prop_assert!(m.vertex_connectivity <= m.edge_connectivity);
        }
    }
}
