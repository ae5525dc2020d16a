use super::{State, StateId, Transition, Wfsa};

impl Wfsa {
    /// Removes states that are not on some start-to-final path. Surviving
    /// states keep their relative order, so trimming a trim machine returns
    /// an identical machine.
    pub fn trim(&self) -> Wfsa {
        let n = self.num_states();
        let mut accessible = vec![false; n];
        let mut stack = vec![self.start];
        accessible[self.start as usize] = true;
        while let Some(s) = stack.pop() {
            for arc in self.arcs(s) {
                if !accessible[arc.target as usize] {
                    accessible[arc.target as usize] = true;
                    stack.push(arc.target);
                }
            }
        }

        let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in self.states() {
            for arc in self.arcs(s) {
                incoming[arc.target as usize].push(s);
            }
        }
        let mut coaccessible = vec![false; n];
        let mut stack: Vec<StateId> = self.states().filter(|&s| self.is_final(s)).collect();
        for &s in &stack {
            coaccessible[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &incoming[s as usize] {
                if !coaccessible[p as usize] {
                    coaccessible[p as usize] = true;
                    stack.push(p);
                }
            }
        }

        if !(accessible[self.start as usize] && coaccessible[self.start as usize]) {
            return Wfsa::empty(self.symbols.clone());
        }
        let mut remap: Vec<Option<StateId>> = vec![None; n];
        let mut next = 0;
        for s in 0..n {
            if accessible[s] && coaccessible[s] {
                remap[s] = Some(next);
                next += 1;
            }
        }
        let mut epsilon_free = true;
        let states = self
            .states
            .iter()
            .enumerate()
            .filter(|(s, _)| remap[*s].is_some())
            .map(|(_, st)| {
                let arcs: Vec<Transition> = st
                    .arcs
                    .iter()
                    .filter_map(|a| {
                        remap[a.target as usize].map(|t| Transition { target: t, ..*a })
                    })
                    .collect();
                epsilon_free &= !arcs.iter().any(Transition::is_epsilon);
                State {
                    arcs,
                    final_weight: st.final_weight,
                }
            })
            .collect();
        // Targets are renumbered monotonically, so label-then-target order
        // survives and no re-sort is needed.
        Wfsa {
            states,
            start: remap[self.start as usize].unwrap(),
            symbols: self.symbols.clone(),
            epsilon_free,
        }
    }
}
