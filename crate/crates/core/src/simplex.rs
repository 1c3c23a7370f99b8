use std::borrow::Borrow;
use std::fmt;

use crate::error::{Error, Result};

/// A nonempty set of point indices, stored strictly increasing.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Box<[u32]>);

impl Simplex {
    /// Sorts the vertices and rejects empty or repeated input.
    pub fn new(mut vertices: Vec<u32>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("a simplex needs at least one vertex".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices.into_boxed_slice()))
    }

    /// Wraps vertices that are already strictly increasing.
    pub(crate) fn from_sorted(vertices: &[u32]) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices.into())
    }

    pub fn vertex(v: u32) -> Self {
        Simplex(Box::new([v]))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Whether every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        is_subset(&self.0, &other.0)
    }

    /// Codimension-one faces, each paired with the removed vertex.
    pub fn facets(&self) -> impl Iterator<Item = (u32, Simplex)> + '_ {
        let len = self.0.len();
        (0..if len > 1 { len } else { 0 }).map(move |skip| {
            let face: Vec<u32> = self
                .0
                .iter()
                .enumerate()
                .filter_map(|(i, &v)| (i != skip).then_some(v))
                .collect();
            (self.0[skip], Simplex(face.into_boxed_slice()))
        })
    }

    /// `self ∪ {v}`; `None` if `v` is already a vertex.
    pub fn with_vertex(&self, v: u32) -> Option<Simplex> {
        match self.0.binary_search(&v) {
            Ok(_) => None,
            Err(pos) => {
                let mut out = Vec::with_capacity(self.0.len() + 1);
                out.extend_from_slice(&self.0[..pos]);
                out.push(v);
                out.extend_from_slice(&self.0[pos..]);
                Some(Simplex(out.into_boxed_slice()))
            }
        }
    }

    /// Union of the vertex sets.
    pub fn union(&self, other: &[u32]) -> Simplex {
        let mut out: Vec<u32> = self.0.iter().chain(other).copied().collect();
        out.sort_unstable();
        out.dedup();
        Simplex(out.into_boxed_slice())
    }
}

impl Borrow<[u32]> for Simplex {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub(crate) fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|v| it.by_ref().any(|w| w == v))
}

/// Writes `vertices` minus position `skip` into `buf`.
#[inline]
pub(crate) fn facet_into(vertices: &[u32], skip: usize, buf: &mut Vec<u32>) {
    buf.clear();
    buf.extend(
        vertices
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| (i != skip).then_some(v)),
    );
}
