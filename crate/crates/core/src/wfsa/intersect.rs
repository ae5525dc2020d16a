use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::{label_range, StateId, Transition, Wfsa, WfsaBuilder, WfsaError};

/// Product construction over two epsilon-free acceptors sharing a symbol
/// table. A string is accepted by the result iff both inputs accept it, with
/// weight `times(weight_a, weight_b)`. The result is trimmed.
///
/// Only pairs reachable from `(start_a, start_b)` are expanded, and for each
/// pair the smaller arc list drives binary-search lookups into the larger
/// one. Intersecting a small window machine with a large domain machine
/// therefore costs roughly the size of the small one.
pub fn intersect(a: &Wfsa, b: &Wfsa) -> Result<Wfsa, WfsaError> {
    if !a.is_epsilon_free() {
        return Err(WfsaError::EpsilonArcs("left"));
    }
    if !b.is_epsilon_free() {
        return Err(WfsaError::EpsilonArcs("right"));
    }
    if !(Arc::ptr_eq(a.symbols(), b.symbols()) || a.symbols() == b.symbols()) {
        return Err(WfsaError::SymbolTableMismatch);
    }

    let mut builder = WfsaBuilder::new(a.symbols().clone());
    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();

    let start = builder.add_state();
    ids.insert((a.start(), b.start()), start);
    builder.set_start(start);
    queue.push_back((a.start(), b.start()));

    while let Some((qa, qb)) = queue.pop_front() {
        let q = ids[&(qa, qb)];
        builder.set_final(q, a.final_weight(qa).times(b.final_weight(qb)))?;

        let (arcs_a, arcs_b) = (a.arcs(qa), b.arcs(qb));
        let swapped = arcs_a.len() > arcs_b.len();
        let (small, large) = if swapped {
            (arcs_b, arcs_a)
        } else {
            (arcs_a, arcs_b)
        };
        let mut i = 0;
        while i < small.len() {
            let label = small[i].label;
            let group = label_range(&small[i..], label);
            i += group.len();
            for x in group {
                for y in label_range(large, label) {
                    let (arc_a, arc_b): (&Transition, &Transition) =
                        if swapped { (y, x) } else { (x, y) };
                    let key = (arc_a.target, arc_b.target);
                    let target = *ids.entry(key).or_insert_with(|| {
                        queue.push_back(key);
                        builder.add_state()
                    });
                    builder.add_arc(q, label, arc_a.weight.times(arc_b.weight), target)?;
                }
            }
        }
    }
    Ok(builder.build()?.trim())
}
