//! Packet selection: vertex weights, the max-delay-increase probability, the
//! multilayer greedy search and its sum-delay baseline, and exhaustive oracles.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{enumerate_maximal_cliques, partition_layers, Clique, IdncGraph, Subgraph, Vertex, VertexId};
use crate::state::ReceiverId;

/// Lower clamp applied to erasure probabilities before taking logarithms.
pub const ERASURE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    MddGreedy,
    SddGreedy,
    MddExact,
    SddExact,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::MddGreedy,
        PolicyKind::SddGreedy,
        PolicyKind::MddExact,
        PolicyKind::SddExact,
    ];

    /// Command-line / CSV name.
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MddGreedy => "mdd",
            PolicyKind::SddGreedy => "sdd",
            PolicyKind::MddExact => "mdd-exact",
            PolicyKind::SddExact => "sdd-exact",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, PolicyKind::MddExact | PolicyKind::SddExact)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown policy `{s}` (expected mdd, sdd, mdd-exact or sdd-exact)"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Minimise the probability that the maximum decoding delay grows.
    Mdd,
    /// Minimise the expected growth of the sum decoding delay.
    Sdd,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("erasure probability {p} outside [0, 1]")))
    }
}

/// `-ln(p)` after flooring `p` at [`ERASURE_FLOOR`].
pub fn vertex_weight_mdd(p: f64) -> Result<f64> {
    check_probability(p)?;
    // -ln(1) is -0.0; normalise the sign
    Ok(0.0 - p.max(ERASURE_FLOOR).ln())
}

/// Reception probability `1 - p`.
pub fn vertex_weight_sdd(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(1.0 - p)
}

/// `w = (w* + 1) * sum of w* over neighbours inside `sub``, for every
/// member of `sub` in vertex order.
///
/// Sums neighbour weights one vertex at a time; the greedy selectors reach the
/// same values through per-receiver neighbour counts.
pub fn modified_weights(sub: &Subgraph<'_>, original: impl Fn(Vertex) -> f64) -> Vec<(Vertex, f64)> {
    let graph = sub.graph();
    sub.ids()
        .map(|u| {
            let neighbours: f64 = sub.neighbors_within(u).map(|v| original(graph.vertex(v))).sum();
            let v = graph.vertex(u);
            (v, (original(v) + 1.0) * neighbours)
        })
        .collect()
}

/// Original and modified weights of every member of a working subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    pub original: Vec<(Vertex, f64)>,
    pub modified: Vec<(Vertex, f64)>,
}

impl WeightAssignment {
    /// Weights for `sub` under `objective`'s vertex weight, with `p` indexed
    /// by receiver.
    pub fn compute(sub: &Subgraph<'_>, p: &[f64], objective: Objective) -> Result<Self> {
        let per_receiver = receiver_weights(sub.graph(), p, objective)?;
        let original = sub.vertices().map(|v| (v, per_receiver[v.receiver])).collect();
        let modified = modified_weights(sub, |v| per_receiver[v.receiver]);
        Ok(WeightAssignment { original, modified })
    }
}

/// Receivers holding the current maximum cumulative delay, `L(t)`.
pub fn max_delay_receivers(delays: &[u32]) -> Vec<ReceiverId> {
    let max = delays.iter().copied().max().unwrap_or(0);
    (0..delays.len()).filter(|&i| delays[i] == max).collect()
}

/// Probability that the maximum decoding delay grows when `clique` is sent:
/// one minus the product of erasure probabilities over the wanting
/// max-delay receivers the clique leaves untargeted.
pub fn prob_max_delay_increase(
    clique: &Clique,
    max_layer_receivers: &[ReceiverId],
    wanting: &[ReceiverId],
    p: &[f64],
) -> f64 {
    let stay: f64 = max_layer_receivers
        .iter()
        .filter(|i| wanting.contains(i) && !clique.targets(**i))
        .map(|&i| p[i])
        .product();
    1.0 - stay
}

/// Expected number of untargeted wanting receivers that receive `clique`,
/// each of which is delayed by one.
pub fn expected_sum_delay_increase(clique: &Clique, wanting: &[ReceiverId], p: &[f64]) -> f64 {
    wanting
        .iter()
        .filter(|&&i| !clique.targets(i))
        .map(|&i| 1.0 - p[i])
        .sum()
}

/// `w*` for each receiver; every vertex of a receiver shares it.
fn receiver_weights(graph: &IdncGraph, p: &[f64], objective: Objective) -> Result<Vec<f64>> {
    if p.len() < graph.receivers() {
        return Err(Error::invalid(format!(
            "{} erasure probabilities for {} receivers",
            p.len(),
            graph.receivers()
        )));
    }
    let weight = match objective {
        Objective::Mdd => vertex_weight_mdd,
        Objective::Sdd => vertex_weight_sdd,
    };
    p[..graph.receivers()].iter().map(|&pi| weight(pi)).collect()
}

/// Repeatedly adds the vertex of largest modified weight to `chosen` and
/// shrinks `working` to its neighbourhood, until `working` is empty. Ties go
/// to the smallest vertex id.
fn grow_clique(mut working: Subgraph<'_>, weight: &[f64], chosen: &mut Vec<VertexId>) {
    let graph = working.graph();
    while !working.is_empty() {
        let mut best: Option<(VertexId, f64)> = None;
        for u in working.ids() {
            let own = weight[graph.vertex(u).receiver];
            let w = (own + 1.0) * working.receiver_weighted_degree(u, weight);
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((u, w));
            }
        }
        let (pick, _) = best.expect("working graph is non-empty");
        chosen.push(pick);
        working.restrict_in_place(pick);
    }
}

/// Multilayer greedy search for the max-decoding-delay policy.
///
/// Layers are visited from the highest cumulative delay down; each layer is
/// first restricted to the common neighbourhood of the vertices already
/// chosen, then grown greedily. The result is a maximal clique of `graph`.
pub fn select_clique_mdd(graph: &IdncGraph, delays: &[u32], p: &[f64]) -> Result<Clique> {
    Ok(Clique::from_ids(graph, mdd_sequence(graph, delays, p)?))
}

/// Vertices in the order [`select_clique_mdd`] picks them.
pub fn mdd_sequence(graph: &IdncGraph, delays: &[u32], p: &[f64]) -> Result<Vec<VertexId>> {
    let weight = receiver_weights(graph, p, Objective::Mdd)?;
    let layers = partition_layers(&graph.full(), delays)?;
    let mut chosen = Vec::new();
    for layer in layers.layers {
        let mut working = layer.vertices;
        for &v in &chosen {
            working.restrict_in_place(v);
        }
        grow_clique(working, &weight, &mut chosen);
    }
    Ok(chosen)
}

/// Single-layer greedy search with reception-probability weights.
pub fn select_clique_sdd(graph: &IdncGraph, p: &[f64]) -> Result<Clique> {
    Ok(Clique::from_ids(graph, sdd_sequence(graph, p)?))
}

pub fn sdd_sequence(graph: &IdncGraph, p: &[f64]) -> Result<Vec<VertexId>> {
    let weight = receiver_weights(graph, p, Objective::Sdd)?;
    let mut chosen = Vec::new();
    grow_clique(graph.full(), &weight, &mut chosen);
    Ok(chosen)
}

/// Receivers with at least one vertex in `graph`.
fn receivers_in(graph: &IdncGraph) -> Vec<ReceiverId> {
    let mut seen: Vec<_> = graph.vertices().iter().map(|v| v.receiver).collect();
    seen.dedup();
    seen
}

/// Exhaustive selection over all maximal cliques, minimising the chosen
/// objective. Ties go to the lexicographically smallest clique.
pub fn select_clique_exact(
    graph: &IdncGraph,
    delays: &[u32],
    p: &[f64],
    objective: Objective,
    bound: usize,
) -> Result<Clique> {
    if delays.len() < graph.receivers() || p.len() < graph.receivers() {
        return Err(Error::invalid("delays and probabilities must cover every receiver"));
    }
    let cliques = enumerate_maximal_cliques(&graph.full(), bound)?;
    let wanting = receivers_in(graph);
    let top = max_delay_receivers(delays);
    let score = |c: &Clique| match objective {
        Objective::Mdd => prob_max_delay_increase(c, &top, &wanting, p),
        Objective::Sdd => expected_sum_delay_increase(c, &wanting, p),
    };
    let mut best: Option<(Clique, f64)> = None;
    for c in cliques {
        let s = score(&c);
        if best.as_ref().is_none_or(|(_, bs)| s < *bs) {
            best = Some((c, s));
        }
    }
    Ok(best.map(|(c, _)| c).unwrap_or_default())
}

/// Dispatches to the selector for `kind`.
pub fn select_clique(kind: PolicyKind, graph: &IdncGraph, delays: &[u32], p: &[f64], bound: usize) -> Result<Clique> {
    match kind {
        PolicyKind::MddGreedy => select_clique_mdd(graph, delays, p),
        PolicyKind::SddGreedy => select_clique_sdd(graph, p),
        PolicyKind::MddExact => select_clique_exact(graph, delays, p, Objective::Mdd, bound),
        PolicyKind::SddExact => select_clique_exact(graph, delays, p, Objective::Sdd, bound),
    }
}
