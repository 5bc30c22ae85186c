use std::collections::BTreeSet;

use serde::Serialize;

use super::SymError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoordKind {
    Q,
    V,
    P,
}

impl CoordKind {
    pub fn prefix(self) -> &'static str {
        match self {
            CoordKind::Q => "q",
            CoordKind::V => "v",
            CoordKind::P => "p",
        }
    }
}

/// A phase-space coordinate; `index` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Coord {
    pub kind: CoordKind,
    pub index: usize,
}

impl Coord {
    pub fn new(kind: CoordKind, index: usize) -> Coord {
        Coord { kind, index }
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.kind.prefix(), self.index)
    }

    /// `q_i <-> v_i`; momenta have no partner.
    pub fn partner(&self) -> Option<Coord> {
        match self.kind {
            CoordKind::Q => Some(Coord::new(CoordKind::V, self.index)),
            CoordKind::V => Some(Coord::new(CoordKind::Q, self.index)),
            CoordKind::P => None,
        }
    }
}

/// The symbols a system may use: `q1..qN`, `v1..vN`, `p1..pN`,
/// declared parameters and declared opaque functions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VarTable {
    pub dim: usize,
    pub params: Vec<String>,
    pub functions: Vec<String>,
}

impl VarTable {
    pub fn new(dim: usize, params: Vec<String>, functions: Vec<String>) -> Result<Self, SymError> {
        if dim == 0 {
            return Err(SymError::InvalidVarTable("dimension must be positive".into()));
        }
        let table = VarTable {
            dim,
            params,
            functions,
        };
        let mut seen = BTreeSet::new();
        for name in table.params.iter().chain(table.functions.iter()) {
            if name == "exp" {
                return Err(SymError::InvalidVarTable("`exp` is reserved".into()));
            }
            if Self::parse_coord_name(name).is_some() {
                return Err(SymError::InvalidVarTable(format!(
                    "`{name}` clashes with a coordinate name"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(SymError::InvalidVarTable(format!("`{name}` declared twice")));
            }
        }
        Ok(table)
    }

    fn parse_coord_name(name: &str) -> Option<Coord> {
        let kind = match name.chars().next()? {
            'q' => CoordKind::Q,
            'v' => CoordKind::V,
            'p' => CoordKind::P,
            _ => return None,
        };
        let rest = &name[1..];
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) || rest.starts_with('0') {
            return None;
        }
        Some(Coord::new(kind, rest.parse().ok()?))
    }

    pub fn coord(&self, name: &str) -> Option<Coord> {
        Self::parse_coord_name(name).filter(|c| c.index <= self.dim)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p == name)
    }

    pub fn is_function(&self, name: &str) -> bool {
        self.functions.iter().any(|f| f == name)
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        self.coord(name).is_some() || self.is_param(name)
    }

    pub fn coords_of(&self, kind: CoordKind) -> Vec<Coord> {
        (1..=self.dim).map(|i| Coord::new(kind, i)).collect()
    }

    /// All coordinates in `q, v, p` order.
    pub fn all_coords(&self) -> Vec<Coord> {
        let mut out = self.coords_of(CoordKind::Q);
        out.extend(self.coords_of(CoordKind::V));
        out.extend(self.coords_of(CoordKind::P));
        out
    }
}
