//! Dynamic undirected graph with per-endpoint port labels.
//!
//! Vertices are anonymous from the point of view of the protocol: a
//! [`VertexId`] is a simulation handle, and the relabeling rules only ever see
//! the labels of a vertex, of its incident ports and of its neighbors (see
//! [`crate::protocol::LocalView`]).
//!
//! Each present edge carries one [`PortLabel`] at each extremity. Removing an
//! edge detaches it from the topology immediately, but the two endpoint
//! entries survive as *stale ports* until the protocol purges them with rule
//! r1 or r2. The [`EdgeRemoval`] record returned by
//! [`DynamicGraph::remove_edge`] is what the protocol uses to do so.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation handle of a vertex. Its integer value doubles as the stable
/// per-run alias used in serialized event logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub(crate) u32);

impl VertexId {
    pub fn alias(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_alias(alias: u32) -> Self {
        VertexId(alias)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Handle of an edge slot. Slots are never reused, so a removed edge that is
/// added again gets a fresh handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub(crate) u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Vertex label: `T` holds a token, `N` does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexLabel {
    #[serde(rename = "T")]
    Token,
    #[serde(rename = "N")]
    Plain,
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexLabel::Token => "T",
            VertexLabel::Plain => "N",
        })
    }
}

/// Label stored at one extremity of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortLabel {
    /// `∅`: the edge is not a tree edge.
    #[serde(rename = "0")]
    NonTree,
    /// `1`: following this edge leads toward the tree's token.
    #[serde(rename = "1")]
    TowardToken,
    /// `2`: the far end is a child in the token-rooted orientation.
    #[serde(rename = "2")]
    AwayFromToken,
}

impl PortLabel {
    pub fn is_tree(self) -> bool {
        self != PortLabel::NonTree
    }
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PortLabel::NonTree => "∅",
            PortLabel::TowardToken => "1",
            PortLabel::AwayFromToken => "2",
        })
    }
}

/// True for the two legal port pairs of a present edge: `{∅,∅}` and `{1,2}`.
pub fn is_legal_pair(a: PortLabel, b: PortLabel) -> bool {
    use PortLabel::*;
    matches!(
        (a, b),
        (NonTree, NonTree) | (TowardToken, AwayFromToken) | (AwayFromToken, TowardToken)
    )
}

/// One present incident edge as seen from a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: VertexId,
    pub edge: EdgeId,
    /// Label on the queried vertex's side.
    pub own_port: PortLabel,
    /// Label on the neighbor's side.
    pub peer_port: PortLabel,
}

/// Snapshot produced by [`DynamicGraph::remove_edge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRemoval {
    pub tick: u64,
    pub edge: EdgeId,
    /// Both endpoints with the port label each held on the lost edge.
    pub ends: [(VertexId, PortLabel); 2],
}

impl EdgeRemoval {
    /// The port `v` held on the lost edge, if `v` is an endpoint.
    pub fn port_of(&self, v: VertexId) -> Option<PortLabel> {
        self.ends.iter().find(|(x, _)| *x == v).map(|&(_, p)| p)
    }

    pub fn other_end(&self, v: VertexId) -> Option<VertexId> {
        match self.ends {
            [(a, _), (b, _)] if a == v => Some(b),
            [(a, _), (b, _)] if b == v => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyOp {
    AddEdge,
    RemoveEdge,
}

/// One line of the topology event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyEvent {
    pub tick: u64,
    pub op: TopologyOp,
    pub u: u32,
    pub v: u32,
}

#[derive(Debug, Clone)]
struct VertexSlot {
    allocated: bool,
    label: VertexLabel,
    /// Present incident edges, in insertion order.
    incident: Vec<EdgeId>,
    /// Ports of removed edges that the protocol has not purged yet.
    stale: Vec<(EdgeId, PortLabel)>,
}

#[derive(Debug, Clone)]
struct EdgeSlot {
    ends: [VertexId; 2],
    ports: [PortLabel; 2],
    present: bool,
}

fn key(u: VertexId, v: VertexId) -> (u32, u32) {
    if u.0 < v.0 {
        (u.0, v.0)
    } else {
        (v.0, u.0)
    }
}

impl Default for VertexSlot {
    fn default() -> Self {
        VertexSlot {
            allocated: false,
            label: VertexLabel::Token,
            incident: Vec::new(),
            stale: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DynamicGraph {
    /// Indexed by handle value.
    vertices: Vec<VertexSlot>,
    /// Handles in creation order.
    created: Vec<VertexId>,
    /// Optional handle assignment: the i-th created vertex gets `plan[i]`.
    plan: Option<Vec<u32>>,
    edges: Vec<EdgeSlot>,
    present: HashMap<(u32, u32), EdgeId>,
    clock: u64,
    log: Vec<TopologyEvent>,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph whose i-th created vertex receives handle `plan[i]` instead of
    /// `i`. Used to check that nothing in the protocol depends on handle
    /// values. Creating more vertices than `plan` covers falls back to
    /// handles past the end of the plan.
    pub fn with_handle_plan(plan: Vec<u32>) -> Self {
        let mut seen = vec![false; plan.len()];
        for &h in &plan {
            assert!(
                (h as usize) < plan.len() && !seen[h as usize],
                "handle plan must be a permutation"
            );
            seen[h as usize] = true;
        }
        DynamicGraph {
            plan: Some(plan),
            ..Self::default()
        }
    }

    /// Adds an isolated vertex labeled `T`.
    pub fn add_vertex(&mut self) -> VertexId {
        let i = self.created.len();
        let h = match &self.plan {
            Some(p) if i < p.len() => p[i],
            Some(p) => i.max(p.len()) as u32,
            None => i as u32,
        };
        if self.vertices.len() <= h as usize {
            self.vertices
                .resize_with(h as usize + 1, VertexSlot::default);
        }
        self.vertices[h as usize].allocated = true;
        let id = VertexId(h);
        self.created.push(id);
        id
    }

    pub fn vertex_count(&self) -> usize {
        self.created.len()
    }

    /// Vertices in creation order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.created.iter().copied()
    }

    /// One past the largest handle value in use; handle-indexed side tables
    /// are sized with this.
    pub fn handle_bound(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.get(v.index()).is_some_and(|s| s.allocated)
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains_vertex(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Adds the edge `u`-`v` with ports `{∅,∅}` and logs the event.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if self.present.contains_key(&key(u, v)) {
            return Err(Error::DuplicateEdge(u, v));
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(EdgeSlot {
            ends: [u, v],
            ports: [PortLabel::NonTree; 2],
            present: true,
        });
        self.present.insert(key(u, v), id);
        self.vertices[u.index()].incident.push(id);
        self.vertices[v.index()].incident.push(id);
        self.log.push(TopologyEvent {
            tick: self.clock,
            op: TopologyOp::AddEdge,
            u: u.0,
            v: v.0,
        });
        Ok(id)
    }

    /// Detaches a present edge. Its two port entries become stale on the
    /// endpoints until the protocol purges them.
    pub fn remove_edge(&mut self, e: EdgeId) -> Result<EdgeRemoval> {
        let slot = self
            .edges
            .get(e.index())
            .filter(|s| s.present)
            .ok_or_else(|| match self.edges.get(e.index()) {
                Some(s) => Error::AbsentEdge(s.ends[0], s.ends[1]),
                None => Error::AbsentEdge(VertexId(u32::MAX), VertexId(u32::MAX)),
            })?
            .clone();
        let [u, v] = slot.ends;
        self.edges[e.index()].present = false;
        self.present.remove(&key(u, v));
        for (i, end) in slot.ends.iter().enumerate() {
            let vs = &mut self.vertices[end.index()];
            vs.incident.retain(|&x| x != e);
            vs.stale.push((e, slot.ports[i]));
        }
        self.log.push(TopologyEvent {
            tick: self.clock,
            op: TopologyOp::RemoveEdge,
            u: u.0,
            v: v.0,
        });
        Ok(EdgeRemoval {
            tick: self.clock,
            edge: e,
            ends: [(u, slot.ports[0]), (v, slot.ports[1])],
        })
    }

    /// Removes the edge between `u` and `v`.
    pub fn remove_edge_between(&mut self, u: VertexId, v: VertexId) -> Result<EdgeRemoval> {
        let e = self.edge_between(u, v).ok_or(Error::AbsentEdge(u, v))?;
        self.remove_edge(e)
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.present.get(&key(u, v)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.present.len()
    }

    /// Present edges in creation order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, s)| s.present)
            .map(|(i, s)| (EdgeId(i as u32), s.ends[0], s.ends[1]))
    }

    pub fn endpoints(&self, e: EdgeId) -> Option<[VertexId; 2]> {
        self.edges
            .get(e.index())
            .filter(|s| s.present)
            .map(|s| s.ends)
    }

    /// Port label held by `v` on the present edge `e`.
    pub fn port(&self, v: VertexId, e: EdgeId) -> Option<PortLabel> {
        let s = self.edges.get(e.index()).filter(|s| s.present)?;
        s.ends.iter().position(|&x| x == v).map(|i| s.ports[i])
    }

    /// Both port labels of the present edge `e`, in endpoint order.
    pub fn ports(&self, e: EdgeId) -> Option<[(VertexId, PortLabel); 2]> {
        let s = self.edges.get(e.index()).filter(|s| s.present)?;
        Some([(s.ends[0], s.ports[0]), (s.ends[1], s.ports[1])])
    }

    /// Present incident edges of `v` in insertion order.
    pub fn neighbors(&self, v: VertexId) -> Result<Vec<Neighbor>> {
        self.check(v)?;
        Ok(self.neighbor_iter(v).collect())
    }

    pub(crate) fn neighbor_iter(&self, v: VertexId) -> impl Iterator<Item = Neighbor> + '_ {
        self.vertices[v.index()].incident.iter().map(move |&e| {
            let s = &self.edges[e.index()];
            let (me, other) = if s.ends[0] == v { (0, 1) } else { (1, 0) };
            Neighbor {
                vertex: s.ends[other],
                edge: e,
                own_port: s.ports[me],
                peer_port: s.ports[other],
            }
        })
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertices[v.index()].incident.len()
    }

    pub fn label(&self, v: VertexId) -> VertexLabel {
        self.vertices[v.index()].label
    }

    pub(crate) fn set_label(&mut self, v: VertexId, label: VertexLabel) {
        self.vertices[v.index()].label = label;
    }

    /// Overwrites both ports of a present edge. Only rule applications (and
    /// world construction) go through here.
    pub(crate) fn set_ports(&mut self, e: EdgeId, at: VertexId, own: PortLabel, peer: PortLabel) {
        let s = &mut self.edges[e.index()];
        debug_assert!(s.present);
        if s.ends[0] == at {
            s.ports = [own, peer];
        } else {
            s.ports = [peer, own];
        }
    }

    /// Stale port entry of `v` for the removed edge `e`, if not yet purged.
    pub fn stale_port(&self, v: VertexId, e: EdgeId) -> Option<PortLabel> {
        self.vertices
            .get(v.index())?
            .stale
            .iter()
            .find(|(x, _)| *x == e)
            .map(|&(_, p)| p)
    }

    pub fn stale_count(&self) -> usize {
        self.vertices.iter().map(|v| v.stale.len()).sum()
    }

    pub(crate) fn purge_stale(&mut self, v: VertexId, e: EdgeId) -> bool {
        let stale = &mut self.vertices[v.index()].stale;
        match stale.iter().position(|(x, _)| *x == e) {
            Some(i) => {
                stale.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn tick(&self) -> u64 {
        self.clock
    }

    pub fn set_tick(&mut self, tick: u64) {
        self.clock = tick;
    }

    pub fn event_log(&self) -> &[TopologyEvent] {
        &self.log
    }

    /// Serializes the event log as JSON lines.
    pub fn event_log_jsonl(&self) -> String {
        let mut out = String::new();
        for ev in &self.log {
            out.push_str(&serde_json::to_string(ev).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// Rebuilds the topology (labels excluded) from `vertex_count` isolated
    /// vertices and an event log.
    pub fn replay(vertex_count: usize, events: &[TopologyEvent]) -> Result<Self> {
        let mut g = DynamicGraph::new();
        for _ in 0..vertex_count {
            g.add_vertex();
        }
        for ev in events {
            g.set_tick(ev.tick);
            let (u, v) = (VertexId(ev.u), VertexId(ev.v));
            match ev.op {
                TopologyOp::AddEdge => {
                    g.add_edge(u, v)?;
                }
                TopologyOp::RemoveEdge => {
                    let rec = g.remove_edge_between(u, v)?;
                    for (x, _) in rec.ends {
                        g.purge_stale(x, rec.edge);
                    }
                }
            }
        }
        Ok(g)
    }

    /// Sorted list of present edges as alias pairs `(min, max)`.
    pub fn topology(&self) -> Vec<(u32, u32)> {
        let mut t: Vec<_> = self.present.keys().copied().collect();
        t.sort_unstable();
        t
    }
}
