//! The IDNC graph: one vertex per (receiver, wanted packet), edges between
//! vertices whose packet XOR is instantly decodable for both receivers.
//!
//! Working subgraphs are bitset views over a shared global graph, so
//! restricting to a vertex's neighbourhood is a single bitwise AND.

use std::fmt;
use std::fmt::Write as _;

use crate::bits;
use crate::error::{Error, Result};
use crate::state::{classify_combination, Classification, FeedbackMatrix, PacketId, ReceiverId};

/// Default vertex-count ceiling for exhaustive clique enumeration.
pub const DEFAULT_ENUMERATION_BOUND: usize = 25;

/// Vertex handle within an [`IdncGraph`]: `receiver * stride + packet`, where
/// the stride rounds the packet count up to whole 64-bit words. Ids order
/// exactly like the (receiver, packet) pairs they encode.
pub type VertexId = usize;

/// `v_ij`: receiver `i` wants packet `j`. Orders lexicographically by
/// (receiver, packet), which is the tie-break order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub receiver: ReceiverId,
    pub packet: PacketId,
}

impl Vertex {
    pub fn new(receiver: ReceiverId, packet: PacketId) -> Self {
        Vertex { receiver, packet }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.receiver, self.packet)
    }
}

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdncGraph {
    receivers: usize,
    /// Words per receiver block.
    block: usize,
    vertices: Vec<Vertex>,
    ids: Vec<VertexId>,
    /// Position in `vertices` for each possible id, or `ABSENT`.
    slot: Vec<u32>,
    present: Vec<u64>,
    /// One row of `receivers * block` words per vertex, in `vertices` order.
    adjacency: Vec<u64>,
}

impl IdncGraph {
    fn empty(receivers: usize, packets: usize, vertices: Vec<Vertex>) -> Self {
        let block = bits::words_for(packets).max(1);
        let stride = block * bits::WORD;
        let words = receivers * block;
        let mut slot = vec![ABSENT; receivers * stride];
        let mut present = vec![0; words];
        let ids: Vec<VertexId> = vertices.iter().map(|v| v.receiver * stride + v.packet).collect();
        for (n, &id) in ids.iter().enumerate() {
            slot[id] = n as u32;
            bits::insert(&mut present, id);
        }
        IdncGraph {
            receivers,
            block,
            adjacency: vec![0; vertices.len() * words],
            vertices,
            ids,
            slot,
            present,
        }
    }

    /// Builds the graph from the current feedback matrix.
    ///
    /// `v_ij ~ v_kl` (with `i != k`) iff `j == l`, or `j` is in `H_k` and `l`
    /// is in `H_i`.
    pub fn build(matrix: &FeedbackMatrix) -> Self {
        let receivers = matrix.receivers();
        let vertices = (0..receivers)
            .flat_map(|i| matrix.wants_set(i).iter().map(move |j| Vertex::new(i, j)))
            .collect();
        let mut graph = IdncGraph::empty(receivers, matrix.packets(), vertices);
        let block = graph.block;
        let words = graph.words();
        let has: Vec<_> = (0..receivers).map(|i| matrix.has_set(i)).collect();
        if block == 1 {
            let wants: Vec<u64> = (0..receivers).map(|k| matrix.wants_set(k).words()[0]).collect();
            for (n, v) in graph.vertices.iter().enumerate() {
                let Vertex { receiver: i, packet: j } = *v;
                let row = &mut graph.adjacency[n * words..(n + 1) * words];
                let bit = 1u64 << j;
                let has_i = has[i].words()[0];
                for (k, (cell, &w)) in row.iter_mut().zip(&wants).enumerate() {
                    if k != i {
                        *cell = if w & bit != 0 { bit } else { has_i & w };
                    }
                }
            }
            return graph;
        }
        for (n, v) in graph.vertices.iter().enumerate() {
            let Vertex { receiver: i, packet: j } = *v;
            let row = &mut graph.adjacency[n * words..(n + 1) * words];
            for k in (0..receivers).filter(|&k| k != i) {
                let cell = &mut row[k * block..(k + 1) * block];
                let wants_k = matrix.wants_set(k);
                if wants_k.contains(j) {
                    bits::insert(cell, j);
                } else {
                    for ((c, h), w) in cell.iter_mut().zip(has[i].words()).zip(wants_k.words()) {
                        *c = h & w;
                    }
                }
            }
        }
        graph
    }

    /// Builds an arbitrary graph from explicit vertices and edges, for
    /// fixtures. Edges between vertices of the same receiver are rejected.
    pub fn from_edges(receivers: usize, vertices: &[Vertex], edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut sorted = vertices.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vertices.len() {
            return Err(Error::invalid("duplicate vertex"));
        }
        if let Some(v) = sorted.iter().find(|v| v.receiver >= receivers) {
            return Err(Error::invalid(format!("vertex {v} names an unknown receiver")));
        }
        let packets = sorted.iter().map(|v| v.packet + 1).max().unwrap_or(0);
        let mut graph = IdncGraph::empty(receivers, packets, sorted);
        let words = graph.words();
        for &(u, v) in edges {
            let (a, b) = match (graph.id_of(u), graph.id_of(v)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::invalid(format!("edge {u} -- {v} uses unknown vertex"))),
            };
            if u.receiver == v.receiver {
                return Err(Error::invalid(format!("edge {u} -- {v} joins one receiver")));
            }
            let (sa, sb) = (graph.slot[a] as usize, graph.slot[b] as usize);
            bits::insert(&mut graph.adjacency[sa * words..(sa + 1) * words], b);
            bits::insert(&mut graph.adjacency[sb * words..(sb + 1) * words], a);
        }
        Ok(graph)
    }

    fn words(&self) -> usize {
        self.receivers * self.block
    }

    fn stride(&self) -> usize {
        self.block * bits::WORD
    }

    pub(crate) fn block(&self) -> usize {
        self.block
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The (receiver, packet) pair an id encodes.
    pub fn vertex(&self, id: VertexId) -> Vertex {
        Vertex::new(id / self.stride(), id % self.stride())
    }

    /// All vertices in (receiver, packet) order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Ids of all vertices, ascending.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id_of(&self, v: Vertex) -> Option<VertexId> {
        if v.receiver >= self.receivers || v.packet >= self.stride() {
            return None;
        }
        let id = v.receiver * self.stride() + v.packet;
        (self.slot[id] != ABSENT).then_some(id)
    }

    pub fn contains(&self, id: VertexId) -> bool {
        bits::contains(&self.present, id)
    }

    /// Adjacency row of a present vertex, as words over the id space.
    pub(crate) fn row(&self, id: VertexId) -> &[u64] {
        let n = self.slot[id] as usize;
        assert!(n != ABSENT as usize, "vertex id {id} not in graph");
        let words = self.words();
        &self.adjacency[n * words..(n + 1) * words]
    }

    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        bits::contains(self.row(a), b)
    }

    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        bits::ones(self.row(id))
    }

    pub fn degree(&self, id: VertexId) -> usize {
        bits::count(self.row(id))
    }

    pub fn edge_count(&self) -> usize {
        self.ids.iter().map(|&id| self.degree(id)).sum::<usize>() / 2
    }

    /// Every vertex of the graph, as a working subgraph.
    pub fn full(&self) -> Subgraph<'_> {
        Subgraph {
            graph: self,
            members: self.present.clone(),
        }
    }

    /// Plain-text adjacency list, one edge per line as `i:j -- k:l`, edges in
    /// lexicographic vertex order.
    pub fn to_adjacency_list(&self) -> String {
        let mut out = String::new();
        for &a in &self.ids {
            for b in self.neighbors(a).filter(|&b| b > a) {
                let _ = writeln!(out, "{} -- {}", self.vertex(a), self.vertex(b));
            }
        }
        out
    }
}

/// Induced subgraph of an [`IdncGraph`]; edges are inherited from the global
/// graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph<'g> {
    graph: &'g IdncGraph,
    members: Vec<u64>,
}

impl<'g> Subgraph<'g> {
    /// Ids not present in `graph` are ignored.
    pub fn from_ids(graph: &'g IdncGraph, ids: impl IntoIterator<Item = VertexId>) -> Self {
        let mut members = vec![0; graph.words()];
        for id in ids.into_iter().filter(|&id| graph.contains(id)) {
            bits::insert(&mut members, id);
        }
        Subgraph { graph, members }
    }

    pub fn graph(&self) -> &'g IdncGraph {
        self.graph
    }

    pub fn len(&self) -> usize {
        bits::count(&self.members)
    }

    pub fn is_empty(&self) -> bool {
        bits::is_clear(&self.members)
    }

    pub fn contains(&self, id: VertexId) -> bool {
        bits::contains(&self.members, id)
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        bits::ones(&self.members)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.ids().map(|id| self.graph.vertex(id))
    }

    /// Neighbours of `id` that lie inside this subgraph.
    pub fn neighbors_within(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        bits::ones_and(self.graph.row(id), &self.members)
    }

    /// `sum_k weight[k] * |N(id) ∩ self ∩ block_k|` where block `k` holds
    /// receiver `k`'s vertices.
    pub(crate) fn receiver_weighted_degree(&self, id: VertexId, weight: &[f64]) -> f64 {
        let block = self.graph.block();
        let row = self.graph.row(id);
        let mut total = 0.0;
        if block == 1 {
            for ((r, m), w) in row.iter().zip(&self.members).zip(weight) {
                let c = (r & m).count_ones();
                if c > 0 {
                    total += w * f64::from(c);
                }
            }
            return total;
        }
        for (k, (r, m)) in row
            .chunks_exact(block)
            .zip(self.members.chunks_exact(block))
            .enumerate()
        {
            let c = bits::intersection_count(r, m);
            if c > 0 {
                total += weight[k] * c as f64;
            }
        }
        total
    }

    /// Induced subgraph on the members adjacent to `id` in the global graph.
    /// `id` itself need not be a member.
    pub fn restrict_to_neighbors(&self, id: VertexId) -> Subgraph<'g> {
        let mut out = self.clone();
        out.restrict_in_place(id);
        out
    }

    pub(crate) fn restrict_in_place(&mut self, id: VertexId) {
        bits::intersect_with(&mut self.members, self.graph.row(id));
    }

    /// Edges with both ends inside the subgraph, as `(smaller, larger)` ids.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.ids()
            .flat_map(|a| self.neighbors_within(a).filter(move |&b| b > a).map(move |b| (a, b)))
            .collect()
    }
}

/// A group of vertices whose receivers share one cumulative delay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer<'g> {
    pub delay: u32,
    pub vertices: Subgraph<'g>,
}

/// `L_1 ... L_h`, ordered by strictly decreasing delay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerPartition<'g> {
    pub layers: Vec<Layer<'g>>,
}

impl LayerPartition<'_> {
    /// Number of layers `h`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Groups the subgraph's vertices by their receiver's cumulative delay,
/// highest delay first. `delays` is indexed by receiver id.
pub fn partition_layers<'g>(sub: &Subgraph<'g>, delays: &[u32]) -> Result<LayerPartition<'g>> {
    let graph = sub.graph;
    let mut layers: Vec<Layer<'g>> = Vec::new();
    for id in sub.ids() {
        let receiver = graph.vertex(id).receiver;
        let delay = *delays
            .get(receiver)
            .ok_or_else(|| Error::invalid(format!("no delay for receiver {receiver}")))?;
        match layers.iter_mut().find(|l| l.delay == delay) {
            Some(layer) => bits::insert(&mut layer.vertices.members, id),
            None => layers.push(Layer {
                delay,
                vertices: Subgraph::from_ids(graph, [id]),
            }),
        }
    }
    layers.sort_by_key(|l| std::cmp::Reverse(l.delay));
    Ok(LayerPartition { layers })
}

/// A set of pairwise adjacent vertices, kept sorted. Its packets XOR into one
/// coded transmission.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clique {
    members: Vec<Vertex>,
}

impl Clique {
    pub fn new(mut members: Vec<Vertex>) -> Self {
        members.sort();
        members.dedup();
        Clique { members }
    }

    pub fn from_ids(graph: &IdncGraph, ids: impl IntoIterator<Item = VertexId>) -> Self {
        Clique::new(ids.into_iter().map(|id| graph.vertex(id)).collect())
    }

    pub fn members(&self) -> &[Vertex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Distinct packets XORed into the transmission, ascending.
    pub fn combo(&self) -> Vec<PacketId> {
        let mut packets: Vec<_> = self.members.iter().map(|v| v.packet).collect();
        packets.sort_unstable();
        packets.dedup();
        packets
    }

    /// `tau(kappa)`: receivers targeted by the transmission, ascending.
    pub fn targeted(&self) -> Vec<ReceiverId> {
        // members are sorted by receiver first
        let mut receivers: Vec<_> = self.members.iter().map(|v| v.receiver).collect();
        receivers.dedup();
        receivers
    }

    pub fn targets(&self, receiver: ReceiverId) -> bool {
        self.members.iter().any(|v| v.receiver == receiver)
    }
}

impl fmt::Display for Clique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, v) in self.members.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// Inclusion-maximal cliques of `sub`, each sorted, in lexicographic order.
///
/// Fails with [`Error::ResourceLimit`] when the subgraph has more than `bound`
/// vertices.
pub fn enumerate_maximal_cliques(sub: &Subgraph<'_>, bound: usize) -> Result<Vec<Clique>> {
    let vertices = sub.len();
    if vertices > bound {
        return Err(Error::ResourceLimit { vertices, bound });
    }
    let graph = sub.graph;
    let mut out = Vec::new();
    let mut current = Vec::new();
    let excluded = vec![0; graph.words()];
    bron_kerbosch(graph, &mut current, sub.members.clone(), excluded, &mut out);
    let mut cliques: Vec<Clique> = out.into_iter().map(|ids| Clique::from_ids(graph, ids)).collect();
    cliques.sort();
    Ok(cliques)
}

// Tomita pivoting: branch only on candidates not adjacent to the pivot.
fn bron_kerbosch(
    graph: &IdncGraph,
    current: &mut Vec<VertexId>,
    mut candidates: Vec<u64>,
    mut excluded: Vec<u64>,
    out: &mut Vec<Vec<VertexId>>,
) {
    if bits::is_clear(&candidates) {
        if bits::is_clear(&excluded) {
            out.push(current.clone());
        }
        return;
    }
    let pivot = bits::ones(&candidates)
        .chain(bits::ones(&excluded))
        .max_by_key(|&u| bits::intersection_count(graph.row(u), &candidates))
        .expect("candidates are non-empty");
    let branch: Vec<VertexId> = bits::ones_and_not(&candidates, graph.row(pivot)).collect();
    for v in branch {
        let row = graph.row(v);
        let mut next_candidates = candidates.clone();
        bits::intersect_with(&mut next_candidates, row);
        let mut next_excluded = excluded.clone();
        bits::intersect_with(&mut next_excluded, row);
        current.push(v);
        bron_kerbosch(graph, current, next_candidates, next_excluded, out);
        current.pop();
        bits::remove(&mut candidates, v);
        bits::insert(&mut excluded, v);
    }
}

/// Ways a vertex set can fail to be a valid transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliqueDefect {
    Empty,
    UnknownVertex(Vertex),
    SharedReceiver(Vertex, Vertex),
    NotAdjacent(Vertex, Vertex),
    /// This vertex is adjacent to every member.
    NotMaximal(Vertex),
    /// A member's receiver cannot instantly decode the combination.
    NotDecodable(ReceiverId),
    /// A receiver outside the clique could instantly decode the combination.
    UntargetedDecoder(ReceiverId),
}

/// Checks that `clique` is a non-empty maximal clique of `graph`, with one
/// vertex per receiver, whose combination is instantly decodable exactly for
/// its targeted receivers.
pub fn check_clique(
    graph: &IdncGraph,
    matrix: &FeedbackMatrix,
    clique: &Clique,
) -> std::result::Result<(), CliqueDefect> {
    if clique.is_empty() {
        return Err(CliqueDefect::Empty);
    }
    let mut ids = Vec::with_capacity(clique.len());
    for &v in clique.members() {
        ids.push(graph.id_of(v).ok_or(CliqueDefect::UnknownVertex(v))?);
    }
    for (x, &a) in ids.iter().enumerate() {
        for &b in &ids[x + 1..] {
            let (u, v) = (graph.vertex(a), graph.vertex(b));
            if u.receiver == v.receiver {
                return Err(CliqueDefect::SharedReceiver(u, v));
            }
            if !graph.adjacent(a, b) {
                return Err(CliqueDefect::NotAdjacent(u, v));
            }
        }
    }
    let mut common = graph.present.clone();
    for &a in &ids {
        bits::intersect_with(&mut common, graph.row(a));
    }
    if let Some(extra) = bits::ones(&common).next() {
        return Err(CliqueDefect::NotMaximal(graph.vertex(extra)));
    }
    let combo = clique.combo();
    for i in 0..matrix.receivers() {
        let decodable = matches!(
            classify_combination(&combo, matrix.wants_set(i)),
            Ok(Classification::InstantlyDecodable(_))
        );
        match (clique.targets(i), decodable) {
            (true, false) => return Err(CliqueDefect::NotDecodable(i)),
            (false, true) => return Err(CliqueDefect::UntargetedDecoder(i)),
            _ => {}
        }
    }
    Ok(())
}
