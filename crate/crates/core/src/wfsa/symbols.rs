use std::collections::HashMap;

/// Symbol id. `EPSILON` (0) is reserved.
pub type Label = u32;

pub const EPSILON: Label = 0;

/// Bidirectional mapping between token strings and positive symbol ids.
///
/// Tables are shared between automata through `Arc`; two automata can only
/// be intersected when they use the same table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<String>,
    ids: HashMap<String, Label>,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable::default()
    }

    /// Builds a table from tokens, assigning ids in first-seen order.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut table = SymbolTable::new();
        for tok in tokens {
            table.intern(tok.as_ref());
        }
        table
    }

    /// Returns the id for `token`, adding it if absent.
    pub fn intern(&mut self, token: &str) -> Label {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        self.symbols.push(token.to_owned());
        let id = self.symbols.len() as Label;
        self.ids.insert(token.to_owned(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<Label> {
        self.ids.get(token).copied()
    }

    pub fn symbol(&self, id: Label) -> Option<&str> {
        if id == EPSILON {
            return None;
        }
        self.symbols.get(id as usize - 1).map(String::as_str)
    }

    /// Resolves a token sequence; `None` if any token is unknown.
    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Vec<Label>> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Number of non-epsilon symbols.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Iterates `(id, token)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i as Label + 1, s.as_str()))
    }
}
