//! Weighted graphs, Laplacians, spanning-tree counting, transfer impedance,
//! determinantal edge probabilities and their fermionic representation, plus
//! a Wilson loop-erased-random-walk sampler.
//!
//! Spanning-tree quantities are computable along three independent routes;
//! they must agree exactly in rational mode:
//! * determinants of the root-reduced negative Laplacian,
//! * Berezin integrals over one generator pair per vertex,
//! * brute-force enumeration (subset filter or contraction-deletion).

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::{fermionic_expectation, integrate_against_gaussian};
use crate::grassmann::{Generator, GrassmannElement, MAX_GENERATORS};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Most edges the enumeration oracle will accept.
pub const ENUMERATION_EDGE_CAP: usize = 25;

#[derive(Clone, Debug)]
pub struct Edge<S> {
    pub u: usize,
    pub v: usize,
    pub w: S,
}

/// An oriented edge, used only by the transfer-impedance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectedEdge {
    pub tail: usize,
    pub head: usize,
}

/// Edge subset of size `|V|−1`, acyclic and spanning; edges are indices into
/// the parent graph's edge list, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct WeightedGraph<S> {
    n: usize,
    edges: Vec<Edge<S>>,
}

/// Transfer-impedance matrix over a chosen list of oriented edges: the bare
/// form `T` from combined reduced-inverse-Laplacian entries, and the weighted
/// form `Y(e,f) = w_e·T(e,f)` whose principal blocks give edge probabilities.
#[derive(Clone, Debug)]
pub struct TransferImpedance<S> {
    pub edges: Vec<DirectedEdge>,
    pub bare: Matrix<S>,
    pub weighted: Matrix<S>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if the two were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl<S: Scalar> WeightedGraph<S> {
    pub fn new(n: usize, edges: Vec<(usize, usize, S)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("graph needs at least one vertex".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Argument(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Argument(format!("self-loop at vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::Argument(format!(
                    "duplicate edge ({},{})",
                    key.0, key.1
                )));
            }
            if w <= S::zero() {
                return Err(Error::Argument(format!(
                    "edge ({u},{v}) has non-positive weight {w}"
                )));
            }
            out.push(Edge { u: key.0, v: key.1, w });
        }
        Ok(WeightedGraph { n, edges: out })
    }

    /// Parses the edge-list format: lines `u v w` with 0-based vertices and a
    /// decimal or `p/q` weight, `#` comments, blank lines ignored. The vertex
    /// count is the largest index plus one.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_vertex = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected `u v w`, got `{line}`"),
                });
            }
            let u: usize = fields[0].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad vertex `{}`", fields[0]),
            })?;
            let v: usize = fields[1].parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad vertex `{}`", fields[1]),
            })?;
            let w = S::parse(fields[2]).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            max_vertex = max_vertex.max(u).max(v);
            edges.push((u, v, w));
        }
        if edges.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no edges in graph file".into(),
            });
        }
        WeightedGraph::new(max_vertex + 1, edges)
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, S::one()));
            }
        }
        WeightedGraph::new(n, edges).expect("valid complete graph")
    }

    /// Rectangular grid with unit weights, vertices in row-major order.
    pub fn grid(width: usize, height: usize) -> Self {
        let at = |x: usize, y: usize| y * width + x;
        let mut edges = Vec::new();
        for y in 0..height {
            for x in 0..width {
                if x + 1 < width {
                    edges.push((at(x, y), at(x + 1, y), S::one()));
                }
                if y + 1 < height {
                    edges.push((at(x, y), at(x, y + 1), S::one()));
                }
            }
        }
        WeightedGraph::new(width * height, edges).expect("valid grid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges
            .iter()
            .position(|e| (e.u, e.v) == key)
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n);
        let mut components = self.n;
        for e in &self.edges {
            if uf.union(e.u, e.v) {
                components -= 1;
            }
        }
        components == 1
    }

    /// The Laplacian: `Δ(u,v) = w_uv` on edges, `−Σ_v w_uv` on the diagonal.
    pub fn laplacian(&self) -> Matrix<S> {
        let mut m = Matrix::zeros(self.n, self.n);
        for e in &self.edges {
            m.set(e.u, e.v, e.w.clone());
            m.set(e.v, e.u, e.w.clone());
            let du = m.at(e.u, e.u).clone() - e.w.clone();
            m.set(e.u, e.u, du);
            let dv = m.at(e.v, e.v).clone() - e.w.clone();
            m.set(e.v, e.v, dv);
        }
        m
    }

    /// `O = −Δ_{oᶜ,oᶜ}`, the negative Laplacian with the root row and column
    /// removed.
    pub fn reduced_neg_laplacian(&self, root: usize) -> Result<Matrix<S>> {
        self.check_vertex(root)?;
        let lap = self.laplacian();
        let keep: Vec<usize> = (0..self.n).filter(|&v| v != root).collect();
        let reduced = lap.submatrix(&keep, &keep);
        Ok(reduced.scale(&-S::one()))
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::Argument(format!(
                "vertex {v} out of range for {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    fn check_edge_id(&self, e: usize) -> Result<()> {
        if e >= self.edges.len() {
            return Err(Error::Argument(format!(
                "edge index {e} out of range for {} edges",
                self.edges.len()
            )));
        }
        Ok(())
    }

    /// Weighted spanning-tree count `det(−Δ_{oᶜ,oᶜ})`: the number of spanning
    /// trees for unit weights, the tree-weight sum in general; independent of
    /// the root. Returns zero when the graph is disconnected.
    pub fn tree_count(&self, root: usize) -> Result<S> {
        self.reduced_neg_laplacian(root)?.determinant()
    }

    /// The same count through the Berezin route: one generator pair per
    /// vertex, integrand `ξ̄_o ξ_o exp((ξ̄, (−Δ) ξ))` over all of `V`.
    pub fn tree_count_berezin(&self, root: usize) -> Result<S> {
        self.check_vertex(root)?;
        if 2 * self.n > MAX_GENERATORS {
            return Err(Error::Capacity(format!(
                "{} vertices need {} generators, cap is {MAX_GENERATORS}",
                self.n,
                2 * self.n
            )));
        }
        let neg_lap = self.laplacian().scale(&-S::one());
        let prefactor = GrassmannElement::monomial(
            self.n,
            &[Generator::barred(root), Generator::plain(root)],
            S::one(),
        );
        integrate_against_gaussian(&prefactor, &neg_lap)
    }

    /// All spanning trees, by filtering `|V|−1`-subsets of the edge list with
    /// a union-find acyclicity check.
    pub fn enumerate_trees(&self) -> Result<Vec<SpanningTree>> {
        if self.edges.len() > ENUMERATION_EDGE_CAP {
            return Err(Error::Capacity(format!(
                "{} edges exceeds the enumeration cap of {ENUMERATION_EDGE_CAP}",
                self.edges.len()
            )));
        }
        let k = self.n - 1;
        let mut out = Vec::new();
        if k > self.edges.len() {
            return Ok(out);
        }
        let mut pick: Vec<usize> = (0..k).collect();
        loop {
            let mut uf = UnionFind::new(self.n);
            if pick
                .iter()
                .all(|&e| uf.union(self.edges[e].u, self.edges[e].v))
            {
                out.push(SpanningTree { edges: pick.clone() });
            }
            // next k-combination of edge indices
            if k == 0 {
                break;
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if pick[i] != i + self.edges.len() - k {
                    break;
                }
            }
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
        }
        Ok(out)
    }

    pub fn tree_weight(&self, tree: &SpanningTree) -> S {
        tree.edges
            .iter()
            .fold(S::one(), |acc, &e| acc * self.edges[e].w.clone())
    }

    /// `Σ_t ∏_{e∈t} w_e` over all spanning trees, by enumeration.
    pub fn tree_weight_sum_enumerated(&self) -> Result<S> {
        Ok(self
            .enumerate_trees()?
            .iter()
            .fold(S::zero(), |acc, t| acc + self.tree_weight(t)))
    }

    /// `Σ_t ∏_{e∈t} w_e` by contraction-deletion, an oracle independent of
    /// both the determinant and the subset filter.
    pub fn tree_weight_sum_contraction(&self) -> Result<S> {
        if self.edges.len() > ENUMERATION_EDGE_CAP {
            return Err(Error::Capacity(format!(
                "{} edges exceeds the enumeration cap of {ENUMERATION_EDGE_CAP}",
                self.edges.len()
            )));
        }
        let edges: Vec<(usize, usize, S)> = self
            .edges
            .iter()
            .map(|e| (e.u, e.v, e.w.clone()))
            .collect();
        Ok(contraction_deletion(self.n, edges))
    }

    /// Weighted probability that a uniform (weight-proportional) spanning
    /// tree contains all of `include` and avoids all of `exclude`, computed
    /// by direct enumeration.
    pub fn event_probability_enumerated(
        &self,
        include: &[usize],
        exclude: &[usize],
    ) -> Result<S> {
        for &e in include.iter().chain(exclude) {
            self.check_edge_id(e)?;
        }
        let trees = self.enumerate_trees()?;
        let mut total = S::zero();
        let mut hit = S::zero();
        for t in &trees {
            let w = self.tree_weight(t);
            total = total + w.clone();
            let has_all = include.iter().all(|e| t.edges.contains(e));
            let avoids = exclude.iter().all(|e| !t.edges.contains(e));
            if has_all && avoids {
                hit = hit + w;
            }
        }
        if total.is_zero() {
            return Err(Error::Connectivity("graph has no spanning tree".into()));
        }
        Ok(hit / total)
    }

    /// The even element `ζ_e = w_uv (ξ̄_u − ξ̄_v)(ξ_u − ξ_v)` over one
    /// generator pair per vertex.
    pub fn zeta(&self, edge_id: usize) -> Result<GrassmannElement<S>> {
        self.check_edge_id(edge_id)?;
        let e = &self.edges[edge_id];
        Ok(zeta_element(self.n, e.u, e.v, &e.w, None))
    }

    /// `ζ_e` in the root-reduced algebra over `V∖{o}`: generators at the
    /// root are zero, matching the reduced-inverse-Laplacian convention.
    pub fn zeta_rooted(&self, edge_id: usize, root: usize) -> Result<GrassmannElement<S>> {
        self.check_edge_id(edge_id)?;
        self.check_vertex(root)?;
        let e = &self.edges[edge_id];
        Ok(zeta_element(self.n - 1, e.u, e.v, &e.w, Some(root)))
    }

    /// Default orientation for the transfer matrix: lower endpoint to higher.
    pub fn oriented(&self, edge_id: usize) -> Result<DirectedEdge> {
        self.check_edge_id(edge_id)?;
        let e = &self.edges[edge_id];
        Ok(DirectedEdge { tail: e.u, head: e.v })
    }

    /// Transfer-impedance matrix over the given oriented edges:
    /// `T(x→y, u→v) = g(x,u) − g(y,u) − g(x,v) + g(y,v)` with `g = O⁻¹`
    /// extended by zeros on the root row and column.
    pub fn transfer_impedance(
        &self,
        root: usize,
        edges: &[DirectedEdge],
    ) -> Result<TransferImpedance<S>> {
        self.check_vertex(root)?;
        if !self.is_connected() {
            return Err(Error::Connectivity(
                "transfer impedance needs a connected graph".into(),
            ));
        }
        for d in edges {
            self.check_vertex(d.tail)?;
            self.check_vertex(d.head)?;
            if self.edge_index(d.tail, d.head).is_none() {
                return Err(Error::Argument(format!(
                    "({},{}) is not a graph edge",
                    d.tail, d.head
                )));
            }
        }
        let o = self.reduced_neg_laplacian(root)?;
        let inv = o.inverse()?;
        let site = |v: usize| if v < root { v } else { v - 1 };
        let g = |x: usize, u: usize| -> S {
            if x == root || u == root {
                S::zero()
            } else {
                inv.at(site(x), site(u)).clone()
            }
        };
        let k = edges.len();
        let bare = Matrix::from_fn(k, k, |i, j| {
            let e = edges[i];
            let f = edges[j];
            g(e.tail, f.tail) - g(e.head, f.tail) - g(e.tail, f.head) + g(e.head, f.head)
        });
        let weighted = Matrix::from_fn(k, k, |i, j| {
            let e = edges[i];
            let w = self.edges[self.edge_index(e.tail, e.head).expect("checked")].w.clone();
            w * bare.at(i, j).clone()
        });
        Ok(TransferImpedance {
            edges: edges.to_vec(),
            bare,
            weighted,
        })
    }

    /// `P(F ⊆ t)` as the determinant of the weighted transfer block over `F`.
    pub fn edge_inclusion_probability(&self, include: &[usize]) -> Result<S> {
        let mut distinct = std::collections::BTreeSet::new();
        for &e in include {
            self.check_edge_id(e)?;
            if !distinct.insert(e) {
                return Err(Error::Argument(format!("edge {e} repeated in F")));
            }
        }
        let oriented: Vec<DirectedEdge> = include
            .iter()
            .map(|&e| self.oriented(e))
            .collect::<Result<_>>()?;
        let t = self.transfer_impedance(0, &oriented)?;
        t.weighted.determinant()
    }

    /// `P(F ⊆ t, F′ ∩ t = ∅)`. Uses the fermionic expectation
    /// `⟨∏_{f∈F} ζ_f ∏_{f′∈F′} (1 − ζ_{f′})⟩` when the graph is small enough,
    /// otherwise inclusion-exclusion over the determinant route.
    pub fn edge_event_probability(&self, include: &[usize], exclude: &[usize]) -> Result<S> {
        self.check_disjoint(include, exclude)?;
        if 2 * (self.n - 1) <= MAX_GENERATORS {
            self.edge_event_probability_fermionic(include, exclude, 0)
        } else {
            self.edge_event_probability_inclusion_exclusion(include, exclude)
        }
    }

    fn check_disjoint(&self, include: &[usize], exclude: &[usize]) -> Result<()> {
        for &e in include.iter().chain(exclude) {
            self.check_edge_id(e)?;
        }
        if include.iter().any(|e| exclude.contains(e)) {
            return Err(Error::Argument("F and F′ overlap".into()));
        }
        Ok(())
    }

    /// The fermionic route: one expectation of a product of ζ factors.
    pub fn edge_event_probability_fermionic(
        &self,
        include: &[usize],
        exclude: &[usize],
        root: usize,
    ) -> Result<S> {
        self.check_disjoint(include, exclude)?;
        self.check_vertex(root)?;
        if 2 * (self.n - 1) > MAX_GENERATORS {
            return Err(Error::Capacity(format!(
                "{} vertices exceed the symbolic generator cap",
                self.n
            )));
        }
        if !self.is_connected() {
            return Err(Error::Connectivity(
                "edge probabilities need a connected graph".into(),
            ));
        }
        let sites = self.n - 1;
        let mut prefactor = GrassmannElement::one(sites);
        for &f in include {
            prefactor = prefactor.wedge(&self.zeta_rooted(f, root)?)?;
        }
        for &f in exclude {
            let factor = GrassmannElement::one(sites).sub(&self.zeta_rooted(f, root)?)?;
            prefactor = prefactor.wedge(&factor)?;
        }
        let o = self.reduced_neg_laplacian(root)?;
        fermionic_expectation(&o, &prefactor)
    }

    /// Inclusion-exclusion over subsets of `F′`, each term a weighted
    /// transfer-block determinant.
    pub fn edge_event_probability_inclusion_exclusion(
        &self,
        include: &[usize],
        exclude: &[usize],
    ) -> Result<S> {
        self.check_disjoint(include, exclude)?;
        let mut total = S::zero();
        for subset in 0u64..(1 << exclude.len()) {
            let mut edges: Vec<usize> = include.to_vec();
            for (pos, &f) in exclude.iter().enumerate() {
                if subset >> pos & 1 == 1 {
                    edges.push(f);
                }
            }
            let p = self.edge_inclusion_probability(&edges)?;
            if subset.count_ones() % 2 == 0 {
                total = total + p;
            } else {
                total = total - p;
            }
        }
        Ok(total)
    }

    /// One Wilson loop-erased-random-walk sample with weight-proportional
    /// transitions; deterministic for a fixed seed.
    pub fn sample_ust(&self, seed: u64) -> Result<SpanningTree> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_ust_with(&mut rng)
    }

    /// As [`Self::sample_ust`] with a caller-owned generator, so independent
    /// streams can sample concurrently.
    pub fn sample_ust_with<R: Rng>(&self, rng: &mut R) -> Result<SpanningTree> {
        if !self.is_connected() {
            return Err(Error::Connectivity("cannot sample a disconnected graph".into()));
        }
        // adjacency with f64 weights for the walk
        let mut nbrs: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); self.n];
        for (id, e) in self.edges.iter().enumerate() {
            let w = e.w.to_f64();
            nbrs[e.u].push((e.v, w, id));
            nbrs[e.v].push((e.u, w, id));
        }
        let totals: Vec<f64> = nbrs
            .iter()
            .map(|list| list.iter().map(|&(_, w, _)| w).sum())
            .collect();
        let mut in_tree = vec![false; self.n];
        let mut next: Vec<usize> = vec![usize::MAX; self.n];
        in_tree[0] = true;
        for start in 1..self.n {
            let mut u = start;
            while !in_tree[u] {
                let mut pick = rng.gen_range(0.0..totals[u]);
                let mut chosen = nbrs[u].len() - 1;
                for (idx, &(_, w, _)) in nbrs[u].iter().enumerate() {
                    if pick < w {
                        chosen = idx;
                        break;
                    }
                    pick -= w;
                }
                next[u] = nbrs[u][chosen].0;
                u = next[u];
            }
            let mut u = start;
            while !in_tree[u] {
                in_tree[u] = true;
                u = next[u];
            }
        }
        let mut edges: Vec<usize> = (1..self.n)
            .map(|u| {
                self.edge_index(u, next[u])
                    .expect("walk follows graph edges")
            })
            .collect();
        edges.sort_unstable();
        Ok(SpanningTree { edges })
    }

    /// Sample `count` trees and return the frequency of each distinct tree.
    pub fn sample_frequencies(
        &self,
        seed: u64,
        count: usize,
    ) -> Result<BTreeMap<SpanningTree, usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut freq = BTreeMap::new();
        for _ in 0..count {
            let t = self.sample_ust_with(&mut rng)?;
            *freq.entry(t).or_insert(0) += 1;
        }
        Ok(freq)
    }
}

/// `w (ξ̄_u − ξ̄_v)(ξ_u − ξ_v)`, with an optional root whose generators are
/// zero and whose removal relabels the remaining sites.
fn zeta_element<S: Scalar>(
    sites: usize,
    u: usize,
    v: usize,
    w: &S,
    root: Option<usize>,
) -> GrassmannElement<S> {
    let site = |x: usize| match root {
        Some(r) if x > r => x - 1,
        _ => x,
    };
    let gen = |x: usize, kind: fn(usize) -> Generator| -> GrassmannElement<S> {
        if root == Some(x) {
            GrassmannElement::zero(sites)
        } else {
            GrassmannElement::generator(sites, kind(site(x)))
        }
    };
    let barred = gen(u, Generator::barred)
        .sub(&gen(v, Generator::barred))
        .expect("same algebra");
    let plain = gen(u, Generator::plain)
        .sub(&gen(v, Generator::plain))
        .expect("same algebra");
    barred.wedge(&plain).expect("same algebra").scale(w)
}

/// Weighted spanning-tree sum by contraction-deletion on a multigraph;
/// parallel edges merge by adding weights, self-loops drop.
fn contraction_deletion<S: Scalar>(n: usize, edges: Vec<(usize, usize, S)>) -> S {
    if n == 1 {
        return S::one();
    }
    // connectivity short-circuit
    let mut uf = UnionFind::new(n);
    let mut components = n;
    for &(u, v, _) in &edges {
        if uf.union(u, v) {
            components -= 1;
        }
    }
    if components != 1 {
        return S::zero();
    }
    let (u0, v0, w0) = edges.last().cloned().expect("connected graph has edges");
    // deletion
    let rest: Vec<(usize, usize, S)> = edges[..edges.len() - 1].to_vec();
    let deleted = contraction_deletion(n, rest.clone());
    // contraction: merge v0 into u0, relabel the last vertex down
    let mut merged: BTreeMap<(usize, usize), S> = BTreeMap::new();
    let relabel = |x: usize| {
        let y = if x == v0 { u0 } else { x };
        if y > v0 {
            y - 1
        } else {
            y
        }
    };
    for (u, v, w) in rest {
        let (a, b) = (relabel(u), relabel(v));
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        match merged.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(w);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + w;
                *e.get_mut() = sum;
            }
        }
    }
    let contracted_edges: Vec<(usize, usize, S)> =
        merged.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    let contracted = contraction_deletion(n - 1, contracted_edges);
    w0 * contracted + deleted
}
