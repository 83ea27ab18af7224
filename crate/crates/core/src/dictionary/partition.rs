use crate::error::{Error, Result};

/// Disjoint, non-empty groups `G_1, ..., G_K` covering `{0, ..., p-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl GroupPartition {
    pub fn new(groups: Vec<Vec<usize>>, p: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; p];
        for (k, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Config(format!("group {k} is empty")));
            }
            for &j in group {
                match owner.get_mut(j) {
                    None => {
                        return Err(Error::Config(format!("index {j} out of range for p = {p}")))
                    }
                    Some(o) if *o != usize::MAX => {
                        return Err(Error::Config(format!(
                            "index {j} appears in groups {} and {k}",
                            *o
                        )))
                    }
                    Some(o) => *o = k,
                }
            }
        }
        if let Some(j) = owner.iter().position(|o| *o == usize::MAX) {
            return Err(Error::Config(format!("index {j} belongs to no group")));
        }
        Ok(Self { groups, owner })
    }

    pub fn singletons(p: usize) -> Self {
        Self {
            groups: (0..p).map(|j| vec![j]).collect(),
            owner: (0..p).collect(),
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of coefficients `p`.
    pub fn dim(&self) -> usize {
        self.owner.len()
    }

    pub fn group_of(&self, j: usize) -> usize {
        self.owner[j]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<usize>> {
        self.groups.iter()
    }
}
