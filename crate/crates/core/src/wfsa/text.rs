//! Line-oriented text serialization.
//!
//! ```text
//! WFSA v1 <nstates> <start>
//! arc <src> <label> <weight> <dst>
//! final <state> <weight>
//! ```
//!
//! Labels are numeric symbol ids (0 for epsilon); the symbol table is
//! supplied by the reader.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Label, StateId, SymbolTable, Weight, Wfsa, WfsaBuilder, WfsaError};

impl Wfsa {
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), WfsaError> {
        let io = |e: std::io::Error| WfsaError::Io(e.to_string());
        writeln!(out, "WFSA v1 {} {}", self.num_states(), self.start).map_err(io)?;
        for s in self.states() {
            for arc in self.arcs(s) {
                writeln!(
                    out,
                    "arc {} {} {} {}",
                    s,
                    arc.label,
                    arc.weight.value(),
                    arc.target
                )
                .map_err(io)?;
            }
        }
        for s in self.states() {
            if self.is_final(s) {
                writeln!(out, "final {} {}", s, self.final_weight(s).value()).map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(input: R, symbols: Arc<SymbolTable>) -> Result<Wfsa, WfsaError> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, message: String| WfsaError::Parse {
            line: line + 1,
            message,
        };
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing header".into()))?;
        let header = header.map_err(|e| WfsaError::Io(e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, start) = match fields.as_slice() {
            ["WFSA", "v1", n, start] => (
                n.parse::<usize>()
                    .map_err(|e| parse_err(0, format!("state count: {e}")))?,
                start
                    .parse::<StateId>()
                    .map_err(|e| parse_err(0, format!("start state: {e}")))?,
            ),
            _ => return Err(parse_err(0, format!("bad header {header:?}"))),
        };
        let mut b = WfsaBuilder::with_states(symbols, n);
        b.set_start(start);

        fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, WfsaError>
        where
            T::Err: std::fmt::Display,
        {
            s.parse::<T>().map_err(|e| WfsaError::Parse {
                line: line + 1,
                message: format!("{what}: {e}"),
            })
        }

        for (i, line) in lines {
            let line = line.map_err(|e| WfsaError::Io(e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let with_line = |e: WfsaError| parse_err(i, e.to_string());
            match fields.as_slice() {
                [] => {}
                ["arc", src, label, w, dst] => {
                    let src: StateId = num(src, i, "source")?;
                    let label: Label = num(label, i, "label")?;
                    let w = Weight::new(num(w, i, "weight")?);
                    let dst: StateId = num(dst, i, "target")?;
                    if label == super::EPSILON {
                        b.add_epsilon(src, w, dst).map_err(with_line)?;
                    } else {
                        b.add_arc(src, label, w, dst).map_err(with_line)?;
                    }
                }
                ["final", s, w] => {
                    let s: StateId = num(s, i, "state")?;
                    b.set_final(s, Weight::new(num(w, i, "weight")?))
                        .map_err(with_line)?;
                }
                _ => return Err(parse_err(i, format!("unrecognized line {line:?}"))),
            }
        }
        b.build()
    }
}
