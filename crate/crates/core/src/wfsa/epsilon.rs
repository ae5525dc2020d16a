use std::collections::HashMap;

use super::paths::relax_closure;
use super::{StateId, Weight, Wfsa, WfsaBuilder, EPSILON};

impl Wfsa {
    /// An epsilon-free acceptor with the same weighted language.
    ///
    /// For each state `q` the tropical epsilon-closure `d(q, p)` is the
    /// shortest epsilon-only distance to `p`. Every labeled arc `p -a/w-> r`
    /// becomes `q -a/(d+w)-> r`, and `q`'s final weight becomes
    /// `min_p d(q, p) + final(p)`. The result is trimmed.
    pub fn remove_epsilon(&self) -> Wfsa {
        if self.epsilon_free {
            return self.trim();
        }
        let n = self.num_states();
        let mut b = WfsaBuilder::with_states(self.symbols.clone(), n);
        b.set_start(self.start);
        let mut dist = vec![Weight::ZERO; n];
        for q in self.states() {
            dist.iter_mut().for_each(|d| *d = Weight::ZERO);
            dist[q as usize] = Weight::ONE;
            relax_closure(self, &mut dist, |l| l == EPSILON);

            let mut final_weight = Weight::ZERO;
            // (label, target) -> best weight
            let mut arcs: HashMap<(u32, StateId), Weight> = HashMap::new();
            for (p, &d) in dist.iter().enumerate() {
                if d.is_zero() {
                    continue;
                }
                let p = p as StateId;
                final_weight = final_weight.plus(d.times(self.final_weight(p)));
                for arc in self.arcs(p).iter().filter(|a| !a.is_epsilon()) {
                    let w = d.times(arc.weight);
                    arcs.entry((arc.label, arc.target))
                        .and_modify(|e| *e = e.plus(w))
                        .or_insert(w);
                }
            }
            b.set_final(q, final_weight)
                .expect("closure of valid weights is valid");
            for ((label, target), w) in arcs {
                b.add_arc(q, label, w, target)
                    .expect("labels and states come from a valid automaton");
            }
        }
        b.build().expect("start state is unchanged").trim()
    }
}
