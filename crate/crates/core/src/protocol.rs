//! The four relabeling rules and the token scheduler.
//!
//! | rule | where | effect |
//! |------|-------|--------|
//! | r1 | `N` vertex lost its port-`1` edge | becomes `T`, fresh token |
//! | r2 | any vertex lost a port-`2` or `∅` edge | drops the stale port |
//! | r3 | two `T` vertices across a `∅` edge | merge: actor stays `T` (port `2`), peer becomes `N` (port `1`) |
//! | r4 | `T` vertex, no merge possible | token moves to a child; ports swap |
//!
//! r3 has priority over r4. Decisions are taken by [`decide`] from a
//! [`LocalView`], which carries labels only: no handle ever reaches the
//! transition function.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::graph::{
    is_legal_pair, DynamicGraph, EdgeId, EdgeRemoval, PortLabel, VertexId, VertexLabel,
};
use crate::walk::{choose_move, WalkPolicy};

pub type TokenId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: TokenId,
    pub position: VertexId,
    /// Vertex the token arrived from on its last move, if still meaningful.
    pub memory: Option<VertexId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "r1")]
    Regenerate,
    #[serde(rename = "r2")]
    Cleanup,
    #[serde(rename = "r3")]
    Merge,
    #[serde(rename = "r4")]
    Circulate,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Regenerate => "r1",
            Rule::Cleanup => "r2",
            Rule::Merge => "r3",
            Rule::Circulate => "r4",
        })
    }
}

/// A vertex label and its sorted (neighbor index, own port, peer port)
/// list, as returned by [`World::canonical_configuration`].
pub type CanonicalVertex = (VertexLabel, Vec<(usize, PortLabel, PortLabel)>);

/// One rule application, for traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFiring {
    pub tick: u64,
    pub rule: Rule,
    pub actor: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peer: Option<VertexId>,
}

/// What a vertex sees of one incident edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortView {
    pub own: PortLabel,
    pub peer: PortLabel,
    pub peer_label: VertexLabel,
}

/// Everything a rule may consult: the actor's label and, per incident edge in
/// local order, both port labels and the neighbor's label. `came_from` is the
/// local index of the edge the token last arrived on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalView {
    pub label: VertexLabel,
    pub ports: Vec<PortView>,
    pub came_from: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Apply r3 across the port with this local index.
    Merge(usize),
    /// Apply r4 through the port with this local index.
    Circulate(usize),
    Idle,
}

/// The token holder's transition: merge with a token-holding neighbor across
/// a non-tree edge if there is one (chosen uniformly), otherwise pass the
/// token along a tree edge according to `policy`.
pub fn decide<R: Rng + ?Sized>(view: &LocalView, policy: WalkPolicy, rng: &mut R) -> Action {
    if view.label != VertexLabel::Token {
        return Action::Idle;
    }
    let merge: Vec<usize> = view
        .ports
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.own == PortLabel::NonTree
                && p.peer == PortLabel::NonTree
                && p.peer_label == VertexLabel::Token
        })
        .map(|(i, _)| i)
        .collect();
    match merge.len() {
        0 => {}
        1 => return Action::Merge(merge[0]),
        n => return Action::Merge(merge[rng.gen_range(0..n)]),
    }
    let children: Vec<usize> = view
        .ports
        .iter()
        .enumerate()
        .filter(|(_, p)| p.own == PortLabel::AwayFromToken && p.peer == PortLabel::TowardToken)
        .map(|(i, _)| i)
        .collect();
    match choose_move(&children, view.came_from, policy, rng) {
        Some(i) => Action::Circulate(i),
        None => Action::Idle,
    }
}

/// A topology change handed to [`World::handle_topology_event`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyChange {
    Added(EdgeId),
    Removed(EdgeRemoval),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub tick: u64,
    pub fired: Vec<RuleFiring>,
    /// Number of r4 applications in the step.
    pub moves: u64,
    pub merges: u64,
    /// Tokens alive after the step.
    pub tokens: usize,
}

impl StepReport {
    pub fn count(&self, rule: Rule) -> usize {
        self.fired.iter().filter(|f| f.rule == rule).count()
    }
}

/// A tree of the forest induced by `{1,2}` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestTree {
    /// Vertices in creation order.
    pub vertices: Vec<VertexId>,
    pub tree_edges: Vec<EdgeId>,
    pub token_vertices: Vec<VertexId>,
}

impl ForestTree {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Partition of the vertices into trees, i.e. connected components of the
/// tree edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestView {
    pub trees: Vec<ForestTree>,
    /// Tree index per handle value (`usize::MAX` for unused handles).
    tree_of: Vec<usize>,
}

impl ForestView {
    pub fn tree_of(&self, v: VertexId) -> Option<usize> {
        self.tree_of
            .get(v.index())
            .copied()
            .filter(|&t| t != usize::MAX)
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invariant violated: {0}")]
pub struct InvariantViolation(pub String);

/// Graph plus token bookkeeping.
#[derive(Debug, Clone)]
pub struct World {
    graph: DynamicGraph,
    tokens: BTreeMap<TokenId, Token>,
    /// Token held per handle value.
    holder: Vec<Option<TokenId>>,
    next_token: TokenId,
}

impl Default for World {
    fn default() -> Self {
        Self::new()
    }
}

impl World {
    pub fn new() -> Self {
        Self::from_graph(DynamicGraph::new())
    }

    /// Wraps an edge-free graph in its initial state: every vertex is a
    /// singleton tree holding its own token.
    pub fn from_graph(graph: DynamicGraph) -> Self {
        assert_eq!(graph.edge_count(), 0, "initial state has no edges");
        let mut w = World {
            holder: Vec::new(),
            graph,
            tokens: BTreeMap::new(),
            next_token: 0,
        };
        let vs: Vec<_> = w.graph.vertices().collect();
        for v in vs {
            w.spawn_token(v);
        }
        w
    }

    /// `n` isolated vertices, each with a token.
    pub fn with_vertices(n: usize) -> (Self, Vec<VertexId>) {
        let mut w = World::new();
        let vs = (0..n).map(|_| w.add_vertex()).collect();
        (w, vs)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let v = self.graph.add_vertex();
        self.spawn_token(v);
        v
    }

    fn spawn_token(&mut self, v: VertexId) {
        let id = self.next_token;
        self.next_token += 1;
        self.tokens.insert(
            id,
            Token {
                id,
                position: v,
                memory: None,
            },
        );
        if self.holder.len() < self.graph.handle_bound() {
            self.holder.resize(self.graph.handle_bound(), None);
        }
        self.holder[v.index()] = Some(id);
        self.graph.set_label(v, VertexLabel::Token);
    }

    fn kill_token(&mut self, v: VertexId) {
        if let Some(id) = self.holder[v.index()].take() {
            self.tokens.remove(&id);
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.values()
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn token_at(&self, v: VertexId) -> Option<&Token> {
        self.holder
            .get(v.index())
            .copied()
            .flatten()
            .and_then(|id| self.tokens.get(&id))
    }

    pub fn tick(&self) -> u64 {
        self.graph.tick()
    }

    /// Topology event: new edge with ports `{∅,∅}`. No rule fires.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.graph.add_edge(u, v)
    }

    /// Topology event: detaches the edge. The caller must pass the record to
    /// [`World::handle_topology_event`] before the next scheduler step.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeRemoval> {
        self.graph.remove_edge_between(u, v)
    }

    /// Removes an edge and immediately fires r1/r2 at both endpoints.
    pub fn cut_edge(&mut self, u: VertexId, v: VertexId) -> Result<Vec<RuleFiring>> {
        let rec = self.remove_edge(u, v)?;
        Ok(self.handle_topology_event(TopologyChange::Removed(rec)))
    }

    /// Builds a tree over fresh singleton vertices, oriented toward `root`,
    /// which keeps the only token. `edges` index into `vertices`.
    ///
    /// Equivalent to a sequence of r3 merges and r4 moves, without the
    /// randomness. Fails if an edge cannot be added.
    pub fn graft_tree(
        &mut self,
        vertices: &[VertexId],
        edges: &[(usize, usize)],
        root: usize,
    ) -> Result<Vec<EdgeId>> {
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        let mut ids = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            let e = self.graph.add_edge(vertices[a], vertices[b])?;
            adj[a].push((b, e));
            adj[b].push((a, e));
            ids.push(e);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(x) = stack.pop() {
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    self.graph.set_ports(
                        e,
                        vertices[x],
                        PortLabel::AwayFromToken,
                        PortLabel::TowardToken,
                    );
                    stack.push(y);
                }
            }
        }
        for (i, &v) in vertices.iter().enumerate() {
            if i != root {
                self.kill_token(v);
                self.graph.set_label(v, VertexLabel::Plain);
            }
        }
        Ok(ids)
    }

    /// Local view of `v`; only labels, no handles.
    pub fn local_view(&self, v: VertexId) -> LocalView {
        let memory = self.token_at(v).and_then(|t| t.memory);
        let mut came_from = None;
        let ports = self
            .graph
            .neighbor_iter(v)
            .enumerate()
            .map(|(i, nb)| {
                if Some(nb.vertex) == memory && nb.own_port == PortLabel::AwayFromToken {
                    came_from = Some(i);
                }
                PortView {
                    own: nb.own_port,
                    peer: nb.peer_port,
                    peer_label: self.graph.label(nb.vertex),
                }
            })
            .collect();
        LocalView {
            label: self.graph.label(v),
            ports,
            came_from,
        }
    }

    /// Rule r3. Returns whether it applied.
    pub fn apply_r3(&mut self, actor: VertexId, peer: VertexId) -> bool {
        if !self.graph.contains_vertex(actor) || !self.graph.contains_vertex(peer) {
            return false;
        }
        if self.graph.label(actor) != VertexLabel::Token
            || self.graph.label(peer) != VertexLabel::Token
        {
            return false;
        }
        let Some(e) = self.graph.edge_between(actor, peer) else {
            return false;
        };
        if self.graph.port(actor, e) != Some(PortLabel::NonTree)
            || self.graph.port(peer, e) != Some(PortLabel::NonTree)
        {
            return false;
        }
        self.graph
            .set_ports(e, actor, PortLabel::AwayFromToken, PortLabel::TowardToken);
        self.kill_token(peer);
        self.graph.set_label(peer, VertexLabel::Plain);
        if let Some(id) = self.holder[actor.index()] {
            self.tokens.get_mut(&id).expect("holder in sync").memory = None;
        }
        true
    }

    /// Rule r4. Returns whether it applied.
    pub fn apply_r4(&mut self, actor: VertexId, target: VertexId) -> bool {
        if !self.graph.contains_vertex(actor) || !self.graph.contains_vertex(target) {
            return false;
        }
        if self.graph.label(actor) != VertexLabel::Token
            || self.graph.label(target) != VertexLabel::Plain
        {
            return false;
        }
        let Some(e) = self.graph.edge_between(actor, target) else {
            return false;
        };
        if self.graph.port(actor, e) != Some(PortLabel::AwayFromToken)
            || self.graph.port(target, e) != Some(PortLabel::TowardToken)
        {
            return false;
        }
        let Some(id) = self.holder[actor.index()].take() else {
            return false;
        };
        self.graph
            .set_ports(e, actor, PortLabel::TowardToken, PortLabel::AwayFromToken);
        self.graph.set_label(actor, VertexLabel::Plain);
        self.graph.set_label(target, VertexLabel::Token);
        self.holder[target.index()] = Some(id);
        let tok = self.tokens.get_mut(&id).expect("holder in sync");
        tok.position = target;
        tok.memory = Some(actor);
        true
    }

    /// Rule r1: `v` lost the edge its port `1` was on.
    pub fn apply_r1(&mut self, v: VertexId, lost: &EdgeRemoval) -> bool {
        if !self.graph.contains_vertex(v) || self.graph.label(v) != VertexLabel::Plain {
            return false;
        }
        if self.graph.stale_port(v, lost.edge) != Some(PortLabel::TowardToken) {
            return false;
        }
        self.graph.purge_stale(v, lost.edge);
        self.spawn_token(v);
        true
    }

    /// Rule r2: `v` lost an edge on which it held port `2` or `∅`.
    pub fn apply_r2(&mut self, v: VertexId, lost: &EdgeRemoval) -> bool {
        if !self.graph.contains_vertex(v) {
            return false;
        }
        match self.graph.stale_port(v, lost.edge) {
            None => return false,
            Some(PortLabel::TowardToken) if self.graph.label(v) == VertexLabel::Plain => {
                return false
            }
            Some(_) => {}
        }
        self.graph.purge_stale(v, lost.edge);
        if let (Some(id), Some(other)) = (self.holder[v.index()], lost.other_end(v)) {
            let tok = self.tokens.get_mut(&id).expect("holder in sync");
            if tok.memory == Some(other) {
                tok.memory = None;
            }
        }
        true
    }

    /// Fires r1 or r2 at both endpoints of a removed edge. Additions fire
    /// nothing.
    pub fn handle_topology_event(&mut self, change: TopologyChange) -> Vec<RuleFiring> {
        let rec = match change {
            TopologyChange::Added(_) => return Vec::new(),
            TopologyChange::Removed(rec) => rec,
        };
        let tick = self.tick();
        let mut fired = Vec::new();
        for (v, _) in rec.ends {
            let other = rec.other_end(v);
            if self.apply_r1(v, &rec) {
                fired.push(RuleFiring {
                    tick,
                    rule: Rule::Regenerate,
                    actor: v,
                    peer: other,
                });
            } else if self.apply_r2(v, &rec) {
                fired.push(RuleFiring {
                    tick,
                    rule: Rule::Cleanup,
                    actor: v,
                    peer: other,
                });
            }
        }
        fired
    }

    /// Activates the token at `v` once: r3 if possible, else r4.
    pub fn activate<R: Rng + ?Sized>(
        &mut self,
        v: VertexId,
        policy: WalkPolicy,
        rng: &mut R,
    ) -> Option<RuleFiring> {
        let view = self.local_view(v);
        let action = decide(&view, policy, rng);
        let tick = self.tick();
        let peer_at = |w: &World, i: usize| {
            w.graph
                .neighbor_iter(v)
                .nth(i)
                .expect("local index from the same view")
                .vertex
        };
        match action {
            Action::Merge(i) => {
                let peer = peer_at(self, i);
                self.apply_r3(v, peer).then_some(RuleFiring {
                    tick,
                    rule: Rule::Merge,
                    actor: v,
                    peer: Some(peer),
                })
            }
            Action::Circulate(i) => {
                let target = peer_at(self, i);
                self.apply_r4(v, target).then_some(RuleFiring {
                    tick,
                    rule: Rule::Circulate,
                    actor: v,
                    peer: Some(target),
                })
            }
            Action::Idle => None,
        }
    }

    /// One round: every token alive at the start of the round is activated
    /// once, in a uniformly shuffled order. Tokens destroyed earlier in the
    /// round are skipped.
    pub fn scheduler_step<R: Rng + ?Sized>(
        &mut self,
        policy: WalkPolicy,
        rng: &mut R,
    ) -> StepReport {
        let mut order: Vec<TokenId> = self.tokens.keys().copied().collect();
        order.shuffle(rng);
        let mut report = StepReport {
            tick: self.tick(),
            ..StepReport::default()
        };
        for id in order {
            let Some(pos) = self.tokens.get(&id).map(|t| t.position) else {
                continue;
            };
            if let Some(f) = self.activate(pos, policy, rng) {
                match f.rule {
                    Rule::Merge => report.merges += 1,
                    Rule::Circulate => report.moves += 1,
                    _ => {}
                }
                report.fired.push(f);
            }
        }
        report.tokens = self.token_count();
        self.graph.set_tick(self.graph.tick() + 1);
        report
    }

    /// Trees induced by tree edges (ports `{1,2}`).
    pub fn forest(&self) -> ForestView {
        let bound = self.graph.handle_bound();
        let mut tree_of = vec![usize::MAX; bound];
        let mut trees = Vec::new();
        for root in self.graph.vertices() {
            if tree_of[root.index()] != usize::MAX {
                continue;
            }
            let t = trees.len();
            let mut tree = ForestTree {
                vertices: Vec::new(),
                tree_edges: Vec::new(),
                token_vertices: Vec::new(),
            };
            tree_of[root.index()] = t;
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                tree.vertices.push(x);
                if self.graph.label(x) == VertexLabel::Token {
                    tree.token_vertices.push(x);
                }
                for nb in self.graph.neighbor_iter(x) {
                    if nb.own_port.is_tree() && nb.peer_port.is_tree() {
                        if x < nb.vertex {
                            tree.tree_edges.push(nb.edge);
                        }
                        if tree_of[nb.vertex.index()] == usize::MAX {
                            tree_of[nb.vertex.index()] = t;
                            stack.push(nb.vertex);
                        }
                    }
                }
            }
            trees.push(tree);
        }
        // creation order inside each tree
        let rank: std::collections::HashMap<VertexId, usize> = self
            .graph
            .vertices()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        for tree in &mut trees {
            tree.vertices.sort_by_key(|v| rank[v]);
            tree.token_vertices.sort_by_key(|v| rank[v]);
            tree.tree_edges.sort_unstable();
        }
        ForestView { trees, tree_of }
    }

    /// Exhaustive check of every protocol invariant.
    pub fn check_invariants(&self) -> std::result::Result<ForestView, InvariantViolation> {
        let fail = |msg: String| Err(InvariantViolation(msg));
        if self.graph.stale_count() != 0 {
            return fail(format!("{} unpurged stale ports", self.graph.stale_count()));
        }
        for (e, u, v) in self.graph.edges() {
            let (pu, pv) = (
                self.graph.port(u, e).unwrap(),
                self.graph.port(v, e).unwrap(),
            );
            if !is_legal_pair(pu, pv) {
                return fail(format!("edge {u}-{v} has port pair {{{pu},{pv}}}"));
            }
        }
        let forest = self.forest();
        for (i, tree) in forest.trees.iter().enumerate() {
            if tree.token_vertices.len() != 1 {
                return fail(format!(
                    "tree {i} of {} vertices has {} T vertices",
                    tree.len(),
                    tree.token_vertices.len()
                ));
            }
            if tree.tree_edges.len() + 1 != tree.len() {
                return fail(format!(
                    "tree {i} has {} vertices and {} tree edges",
                    tree.len(),
                    tree.tree_edges.len()
                ));
            }
            let root = tree.token_vertices[0];
            for &v in &tree.vertices {
                let ups: Vec<VertexId> = self
                    .graph
                    .neighbor_iter(v)
                    .filter(|nb| nb.own_port == PortLabel::TowardToken)
                    .map(|nb| nb.vertex)
                    .collect();
                let want = usize::from(v != root);
                if ups.len() != want {
                    return fail(format!(
                        "{v} ({}) has {} ports labeled 1",
                        self.graph.label(v),
                        ups.len()
                    ));
                }
                // follow port-1 edges to the token
                let mut x = v;
                let mut hops = 0;
                while x != root {
                    x = self
                        .graph
                        .neighbor_iter(x)
                        .find(|nb| nb.own_port == PortLabel::TowardToken)
                        .map(|nb| nb.vertex)
                        .expect("checked above");
                    hops += 1;
                    if hops > tree.len() - 1 {
                        return fail(format!("port-1 path from {v} does not reach the token"));
                    }
                }
            }
        }
        // token bookkeeping
        let t_vertices = self
            .graph
            .vertices()
            .filter(|&v| self.graph.label(v) == VertexLabel::Token)
            .count();
        if t_vertices != self.tokens.len() {
            return fail(format!(
                "{t_vertices} T vertices but {} tokens",
                self.tokens.len()
            ));
        }
        for tok in self.tokens.values() {
            if self.graph.label(tok.position) != VertexLabel::Token
                || self.holder[tok.position.index()] != Some(tok.id)
            {
                return fail(format!("token {} misplaced at {}", tok.id, tok.position));
            }
            if let Some(m) = tok.memory {
                let ok = self
                    .graph
                    .neighbor_iter(tok.position)
                    .any(|nb| nb.vertex == m && nb.own_port == PortLabel::AwayFromToken);
                if !ok {
                    return fail(format!(
                        "token {} remembers {m}, not a tree neighbor",
                        tok.id
                    ));
                }
            }
        }
        Ok(forest)
    }

    /// Label configuration keyed by creation index: per vertex its label and
    /// the sorted list of (neighbor creation index, own port, peer port).
    /// Two worlds with equal canonical configurations are isomorphic under
    /// the creation-order correspondence.
    pub fn canonical_configuration(&self) -> Vec<CanonicalVertex> {
        let rank: std::collections::HashMap<VertexId, usize> = self
            .graph
            .vertices()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        self.graph
            .vertices()
            .map(|v| {
                let mut ports: Vec<_> = self
                    .graph
                    .neighbor_iter(v)
                    .map(|nb| (rank[&nb.vertex], nb.own_port, nb.peer_port))
                    .collect();
                ports.sort_by_key(|p| p.0);
                (self.graph.label(v), ports)
            })
            .collect()
    }

    /// Runs scheduler steps until one token is left per connected component
    /// (no r3 possible anywhere) or `max_moves` r4 applications have been
    /// spent. Returns the number of moves used, or `None` on budget
    /// exhaustion.
    pub fn run_to_quiescence<R: Rng + ?Sized>(
        &mut self,
        policy: WalkPolicy,
        max_moves: u64,
        rng: &mut R,
    ) -> Option<u64> {
        let target = connected_components(&self.graph);
        let mut moves = 0;
        while self.token_count() > target {
            if moves >= max_moves {
                return None;
            }
            moves += self.scheduler_step(policy, rng).moves;
        }
        Some(moves)
    }
}

/// Number of connected components of the present topology.
pub fn connected_components(g: &DynamicGraph) -> usize {
    let mut seen = vec![false; g.handle_bound()];
    let mut count = 0;
    for v in g.vertices() {
        if seen[v.index()] {
            continue;
        }
        count += 1;
        seen[v.index()] = true;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for nb in g.neighbor_iter(x) {
                if !seen[nb.vertex.index()] {
                    seen[nb.vertex.index()] = true;
                    stack.push(nb.vertex);
                }
            }
        }
    }
    count
}

/// JSON-lines rendering of rule firings.
pub fn firings_jsonl(fired: &[RuleFiring]) -> String {
    let mut out = String::new();
    for f in fired {
        out.push_str(&serde_json::to_string(f).expect("firing serializes"));
        out.push('\n');
    }
    out
}
