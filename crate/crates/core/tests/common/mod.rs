//! Random instance generators shared by the integration targets.

#![allow(dead_code)]

use idnc::graph::Subgraph;
use idnc::{Clique, FeedbackMatrix, FrameState, IdncGraph};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Random frame with at least one wanted packet. Each entry is wanted with a
/// per-instance probability; erasure probabilities stay below `p_max`.
pub fn random_state<R: Rng>(rng: &mut R, max_m: usize, max_n: usize, p_max: f64) -> FrameState {
    let m = rng.random_range(1..=max_m);
    let n = rng.random_range(1..=max_n);
    let density = rng.random_range(0.1..0.9);
    let mut matrix = FeedbackMatrix::new(m, n);
    for i in 0..m {
        for j in 0..n {
            if rng.random_bool(density) {
                matrix.set_wanted(i, j);
            }
        }
    }
    if matrix.is_complete() {
        matrix.set_wanted(rng.random_range(0..m), rng.random_range(0..n));
    }
    let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..p_max)).collect();
    let delays: Vec<u32> = (0..m).map(|_| rng.random_range(0..4)).collect();
    FrameState::new(matrix, &p).unwrap().with_delays(&delays).unwrap()
}

/// A uniformly grown maximal clique: repeatedly pick a random vertex of the
/// working set and restrict to its neighbours.
pub fn random_maximal_clique<R: Rng>(graph: &IdncGraph, rng: &mut R) -> Clique {
    let mut working: Subgraph<'_> = graph.full();
    let mut chosen = Vec::new();
    while !working.is_empty() {
        let ids: Vec<_> = working.ids().collect();
        let &u = ids.choose(rng).unwrap();
        chosen.push(u);
        working = working.restrict_to_neighbors(u);
    }
    Clique::from_ids(graph, chosen)
}

/// Adjacency straight from the definition, independent of the graph's bitsets.
pub fn adjacent_by_definition(matrix: &FeedbackMatrix, a: (usize, usize), b: (usize, usize)) -> bool {
    let ((i, j), (k, l)) = (a, b);
    i != k && (j == l || (matrix.has(k, j) && matrix.has(i, l)))
}

/// `|W_i| + |H_i| = N` for every receiver.
pub fn check_conservation(state: &FrameState) -> Result<(), String> {
    let m = state.matrix();
    for i in 0..m.receivers() {
        let (w, h) = (m.wants_set(i).len(), m.has_set(i).len());
        if w + h != m.packets() {
            return Err(format!("receiver {i}: |W|={w} + |H|={h} != {}", m.packets()));
        }
    }
    Ok(())
}

/// Adjacency is symmetric and agrees with the definition.
pub fn check_adjacency(state: &FrameState) -> Result<(), String> {
    let matrix = state.matrix();
    let graph = IdncGraph::build(matrix);
    let ids = graph.ids().to_vec();
    let expected: usize = (0..matrix.receivers()).map(|i| matrix.wants_count(i)).sum();
    if ids.len() != expected {
        return Err(format!("{} vertices for {expected} wanted entries", ids.len()));
    }
    for &a in &ids {
        for &b in &ids {
            let (u, v) = (graph.vertex(a), graph.vertex(b));
            let adj = graph.adjacent(a, b);
            if adj != graph.adjacent(b, a) {
                return Err(format!("asymmetric edge {u} / {v}"));
            }
            if adj != adjacent_by_definition(matrix, (u.receiver, u.packet), (v.receiver, v.packet)) {
                return Err(format!("edge {u} -- {v} disagrees with the definition"));
            }
        }
    }
    Ok(())
}

/// Layers are disjoint, cover every vertex, share one delay each and come in
/// strictly decreasing delay order.
pub fn check_layers(state: &FrameState) -> Result<(), String> {
    let graph = IdncGraph::build(state.matrix());
    let delays = state.delays();
    let part = idnc::graph::partition_layers(&graph.full(), &delays).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for pair in part.layers.windows(2) {
        if pair[0].delay <= pair[1].delay {
            return Err(format!("layer order {} then {}", pair[0].delay, pair[1].delay));
        }
    }
    for layer in &part.layers {
        for v in layer.vertices.vertices() {
            if delays[v.receiver] != layer.delay {
                return Err(format!("{v} in layer {} but delay {}", layer.delay, delays[v.receiver]));
            }
            seen.push(v);
        }
    }
    seen.sort();
    let mut all = graph.vertices().to_vec();
    all.sort();
    if seen != all {
        return Err(format!("layers hold {} vertices, graph {}", seen.len(), all.len()));
    }
    Ok(())
}

/// Max-delay increase probability lies in `[0, 1]` and is zero exactly when
/// every wanting max-delay receiver is targeted. Needs erasure < 1.
pub fn check_prob_bounds<R: Rng>(state: &FrameState, rng: &mut R) -> Result<(), String> {
    let graph = IdncGraph::build(state.matrix());
    if graph.is_empty() {
        return Ok(());
    }
    let clique = random_maximal_clique(&graph, rng);
    let delays = state.delays();
    let top = idnc::policies::max_delay_receivers(&delays);
    let wanting = state.matrix().wanting_receivers();
    let prob = idnc::policies::prob_max_delay_increase(&clique, &top, &wanting, &state.erasure_probs());
    if !(0.0..=1.0).contains(&prob) {
        return Err(format!("probability {prob} outside [0, 1]"));
    }
    let covered = top.iter().all(|&i| !wanting.contains(&i) || clique.targets(i));
    if (prob == 0.0) != covered {
        return Err(format!("probability {prob} but covered = {covered} for {clique}"));
    }
    Ok(())
}

/// Runs the recovery phase under a random policy, checking that every
/// transmission raises each delay by zero or one and conserves packets.
pub fn check_delay_steps<R: Rng>(mut state: FrameState, rng: &mut R, max_steps: usize) -> Result<(), String> {
    use idnc::policies::select_clique;
    use idnc::PolicyKind;
    let kinds = [PolicyKind::MddGreedy, PolicyKind::SddGreedy];
    for _ in 0..max_steps {
        let graph = IdncGraph::build(state.matrix());
        if graph.is_empty() {
            break;
        }
        let kind = *kinds.choose(rng).unwrap();
        let clique =
            select_clique(kind, &graph, &state.delays(), &state.erasure_probs(), 25).map_err(|e| e.to_string())?;
        let before = state.delays();
        let out = idnc::sim::transmit_once(&mut state, &clique, rng).map_err(|e| e.to_string())?;
        let after = state.delays();
        for i in 0..before.len() {
            let step = after[i]
                .checked_sub(before[i])
                .ok_or(format!("delay of {i} decreased"))?;
            if step > 1 || step != out.increments[i] {
                return Err(format!(
                    "receiver {i} delay step {step}, reported {}",
                    out.increments[i]
                ));
            }
        }
        let grew = after.iter().max() > before.iter().max();
        if grew != out.x_event {
            return Err("max-delay event flag disagrees with delays".into());
        }
        check_conservation(&state)?;
    }
    Ok(())
}
