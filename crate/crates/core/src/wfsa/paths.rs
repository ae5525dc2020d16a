//! String scoring, shortest distance and bounded path enumeration.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{Label, StateId, Weight, Wfsa};

/// Dijkstra relaxation from the tentative distances in `dist`, following
/// only arcs accepted by `follow`. Weights are non-negative, so every state
/// is settled once.
pub(super) fn relax_closure<F>(a: &Wfsa, dist: &mut [Weight], follow: F)
where
    F: Fn(Label) -> bool,
{
    let mut heap: BinaryHeap<Reverse<(Weight, StateId)>> = dist
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(s, &w)| Reverse((w, s as StateId)))
        .collect();
    while let Some(Reverse((d, s))) = heap.pop() {
        if d > dist[s as usize] {
            continue;
        }
        for arc in a.arcs(s) {
            if !follow(arc.label) {
                continue;
            }
            let nd = d.times(arc.weight);
            if nd < dist[arc.target as usize] {
                dist[arc.target as usize] = nd;
                heap.push(Reverse((nd, arc.target)));
            }
        }
    }
}

impl Wfsa {
    /// Best weight over all accepting paths labeled `tokens`, or `None` when
    /// no such path exists. Unknown tokens reject.
    pub fn accept<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Weight> {
        let labels = self.symbols.ids(tokens)?;
        self.accept_labels(&labels)
    }

    /// As [`accept`](Self::accept), over symbol ids.
    pub fn accept_labels(&self, labels: &[Label]) -> Option<Weight> {
        let n = self.num_states();
        let mut dist = vec![Weight::ZERO; n];
        dist[self.start as usize] = Weight::ONE;
        let eps = !self.epsilon_free;
        if eps {
            relax_closure(self, &mut dist, |l| l == super::EPSILON);
        }
        for &label in labels {
            let mut next = vec![Weight::ZERO; n];
            let mut any = false;
            for (s, &d) in dist.iter().enumerate() {
                if d.is_zero() {
                    continue;
                }
                for arc in self.arcs_with_label(s as StateId, label) {
                    let t = arc.target as usize;
                    next[t] = next[t].plus(d.times(arc.weight));
                    any = true;
                }
            }
            if !any {
                return None;
            }
            if eps {
                relax_closure(self, &mut next, |l| l == super::EPSILON);
            }
            dist = next;
        }
        let best = dist
            .iter()
            .enumerate()
            .fold(Weight::ZERO, |acc, (s, &d)| {
                acc.plus(d.times(self.final_weight(s as StateId)))
            });
        (!best.is_zero()).then_some(best)
    }

    /// Best weight of any accepting path, including the final weight.
    pub fn shortest_distance(&self) -> Option<Weight> {
        let mut dist = vec![Weight::ZERO; self.num_states()];
        dist[self.start as usize] = Weight::ONE;
        relax_closure(self, &mut dist, |_| true);
        let best = dist
            .iter()
            .enumerate()
            .fold(Weight::ZERO, |acc, (s, &d)| {
                acc.plus(d.times(self.final_weight(s as StateId)))
            });
        (!best.is_zero()).then_some(best)
    }

    /// Every accepted label string of length at most `max_len`, with its
    /// best weight, in lexicographic label order.
    ///
    /// Intended for small or acyclic machines: the search follows every path
    /// of up to `max_len` labeled arcs, and at most `num_states` consecutive
    /// epsilon arcs.
    pub fn enumerate(&self, max_len: usize) -> Vec<(Vec<Label>, Weight)> {
        let mut out: BTreeMap<Vec<Label>, Weight> = BTreeMap::new();
        let mut labels = Vec::new();
        self.enumerate_from(self.start, Weight::ONE, max_len, 0, &mut labels, &mut out);
        out.into_iter().collect()
    }

    fn enumerate_from(
        &self,
        state: StateId,
        acc: Weight,
        max_len: usize,
        eps_run: usize,
        labels: &mut Vec<Label>,
        out: &mut BTreeMap<Vec<Label>, Weight>,
    ) {
        let fw = self.final_weight(state);
        if !fw.is_zero() {
            let w = acc.times(fw);
            out.entry(labels.clone())
                .and_modify(|e| *e = e.plus(w))
                .or_insert(w);
        }
        for arc in self.arcs(state) {
            let acc = acc.times(arc.weight);
            if arc.is_epsilon() {
                if eps_run < self.num_states() {
                    self.enumerate_from(arc.target, acc, max_len, eps_run + 1, labels, out);
                }
            } else if labels.len() < max_len {
                labels.push(arc.label);
                self.enumerate_from(arc.target, acc, max_len, 0, labels, out);
                labels.pop();
            }
        }
    }
}
