use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// Interned symbol index, valid within one [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijective mapping between token names and ids. Ids are assigned densely
/// in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn validate_name(name: &str) -> Result<()> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidTokenName(name.to_string()));
        }
        Ok(())
    }

    /// Returns the id for `name`, allocating a new one on first sight.
    pub fn intern(&mut self, name: &str) -> Result<TokenId> {
        if let Some(&id) = self.index.get(name) {
            return Ok(id);
        }
        Self::validate_name(name)?;
        let id = TokenId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<TokenId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: TokenId) -> Option<&str> {
        self.names.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Names in id order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rebuilds a vocabulary from names in id order, rejecting duplicates.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::new();
        for name in names {
            let name = name.as_ref();
            if vocab.lookup(name).is_some() {
                return Err(Error::Snapshot(format!("duplicate vocabulary entry {name:?}")));
            }
            vocab.intern(name)?;
        }
        Ok(vocab)
    }
}
