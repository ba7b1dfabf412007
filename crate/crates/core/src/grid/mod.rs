//! Grid data model and matrix assembly.
//!
//! A [`GridGraph`] is an immutable bus/branch network. Branches carry
//! per-km series impedance, a component kind (line, switch, transformer)
//! and an in-service flag. Derived matrices (incidence, admittance,
//! Laplacian) are pure functions of the graph.

mod io;
mod matrices;

pub use io::{load_grid, parse_bus_file, parse_edge_list, write_bus_file, write_edge_list, GridFormat};
pub use matrices::{
    admittance_matrix, admittance_matrix_with, branch_admittances, incidence_matrix, laplacian,
    simple_adjacency_matrix, AdmittanceMatrix, AdmittanceOptions,
};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Bus identifier as it appears in grid files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for BusId {
    fn from(v: u32) -> Self {
        BusId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusRole {
    Generator,
    Load,
    Intermediate,
}

impl BusRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            BusRole::Generator => "generator",
            BusRole::Load => "load",
            BusRole::Intermediate => "intermediate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    /// Nominal voltage level in kV; `None` when the bus file omits it.
    pub voltage_kv: Option<f64>,
    pub role: BusRole,
}

impl Bus {
    pub fn new(id: impl Into<BusId>) -> Self {
        Bus {
            id: id.into(),
            voltage_kv: None,
            role: BusRole::Intermediate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Line,
    Switch,
    Transformer,
}

impl BranchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchKind::Line => "line",
            BranchKind::Switch => "switch",
            BranchKind::Transformer => "transformer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchStatus {
    InService,
    Open,
}

impl BranchStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchStatus::InService => "in_service",
            BranchStatus::Open => "open",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    pub length_m: f64,
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    pub kind: BranchKind,
    pub status: BranchStatus,
}

impl Branch {
    pub fn line(from: impl Into<BusId>, to: impl Into<BusId>, length_m: f64, r: f64, x: f64) -> Self {
        Branch {
            from: from.into(),
            to: to.into(),
            length_m,
            r_ohm_per_km: r,
            x_ohm_per_km: x,
            kind: BranchKind::Line,
            status: BranchStatus::InService,
        }
    }

    pub fn is_in_service(&self) -> bool {
        self.status == BranchStatus::InService
    }

    /// Series impedance `z = (r + jx) · length_km` in ohms.
    pub fn series_impedance_ohm(&self) -> Complex64 {
        let km = self.length_m / 1000.0;
        Complex64::new(self.r_ohm_per_km * km, self.x_ohm_per_km * km)
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("branch {index} references unknown bus {bus}")]
    DanglingEndpoint { index: usize, bus: BusId },
    #[error("branch {index} is a self-loop at bus {bus}")]
    SelfLoop { index: usize, bus: BusId },
    #[error("branch {index}: {message}")]
    InvalidBranch { index: usize, message: String },
    #[error("bus {id}: {message}")]
    InvalidBus { id: BusId, message: String },
    #[error(
        "branch {index} ({from}-{to}) has zero series impedance; \
         configure a surrogate impedance for switches and ideal transformers"
    )]
    ZeroImpedance { index: usize, from: BusId, to: BusId },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// An immutable bus/branch network.
///
/// Buses are stored sorted by id; branches keep their ingestion order so
/// that a load → serialize → load round trip reproduces the graph exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    buses: Vec<Bus>,
    index: HashMap<BusId, usize>,
    branches: Vec<Branch>,
    mains_frequency_hz: f64,
}

impl GridGraph {
    /// Validates and builds a grid. Branch endpoints must reference known
    /// buses, self-loops are rejected, lengths and resistances must be
    /// non-negative.
    pub fn new(mut buses: Vec<Bus>, branches: Vec<Branch>) -> Result<Self, GridError> {
        buses.sort_by_key(|b| b.id);
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(GridError::DuplicateBus(bus.id));
            }
            if let Some(kv) = bus.voltage_kv {
                if !(kv > 0.0) {
                    return Err(GridError::InvalidBus {
                        id: bus.id,
                        message: format!("voltage level must be positive, got {kv}"),
                    });
                }
            }
        }
        for (i, br) in branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !index.contains_key(&end) {
                    return Err(GridError::DanglingEndpoint { index: i, bus: end });
                }
            }
            if br.from == br.to {
                return Err(GridError::SelfLoop { index: i, bus: br.from });
            }
            if !(br.length_m >= 0.0) {
                return Err(GridError::InvalidBranch {
                    index: i,
                    message: format!("length must be >= 0, got {}", br.length_m),
                });
            }
            if !(br.r_ohm_per_km >= 0.0) {
                return Err(GridError::InvalidBranch {
                    index: i,
                    message: format!("resistance must be >= 0, got {}", br.r_ohm_per_km),
                });
            }
            if !br.length_m.is_finite() || !br.r_ohm_per_km.is_finite() || !br.x_ohm_per_km.is_finite()
            {
                return Err(GridError::InvalidBranch {
                    index: i,
                    message: "non-finite branch parameter".into(),
                });
            }
        }
        Ok(GridGraph {
            buses,
            index,
            branches,
            mains_frequency_hz: 60.0,
        })
    }

    /// Builds a grid from implicit buses: every endpoint mentioned by a
    /// branch becomes an intermediate bus.
    pub fn from_branches(branches: Vec<Branch>) -> Result<Self, GridError> {
        let ids: BTreeSet<BusId> = branches.iter().flat_map(|b| [b.from, b.to]).collect();
        GridGraph::new(ids.into_iter().map(Bus::new).collect(), branches)
    }

    pub fn with_mains_frequency(mut self, f0_hz: f64) -> Self {
        self.mains_frequency_hz = f0_hz;
        self
    }

    /// Mains frequency f0 in Hz (50 or 60; defaults to 60).
    pub fn mains_frequency_hz(&self) -> f64 {
        self.mains_frequency_hz
    }

    /// N: number of buses.
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// m: number of in-service branches (parallel branches not collapsed).
    pub fn n_in_service_branches(&self) -> usize {
        self.branches.iter().filter(|b| b.is_in_service()).count()
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn in_service_branches(&self) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_in_service())
    }

    /// Dense index of a bus id, if present.
    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn bus_id(&self, index: usize) -> BusId {
        self.buses[index].id
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.bus_index(id).map(|i| &self.buses[i])
    }

    /// Unique in-service adjacency pairs `(i, j)` with `i < j` over dense
    /// indices: the edge set of the simplified graph (parallel branches
    /// collapsed, open branches excluded, no self-loops by construction).
    pub fn simplified_edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for (_, br) in self.in_service_branches() {
            let a = self.index[&br.from];
            let b = self.index[&br.to];
            set.insert((a.min(b), a.max(b)));
        }
        set.into_iter().collect()
    }

    /// Number of edges of the simplified graph.
    pub fn n_simplified_edges(&self) -> usize {
        self.simplified_edges().len()
    }

    /// Adjacency lists of the simplified graph, neighbor lists sorted.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.buses.len()];
        for (a, b) in self.simplified_edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> GridGraph {
        GridGraph::from_branches(vec![Branch::line(1, 2, 100.0, 0.2, 0.35)]).unwrap()
    }

    #[test]
    fn minimal_grid_counts() {
        let g = two_bus();
        assert_eq!(g.n_buses(), 2);
        assert_eq!(g.n_in_service_branches(), 1);
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let buses = vec![Bus::new(1), Bus::new(2)];
        let branches = vec![Branch::line(1, 99, 10.0, 0.1, 0.1)];
        match GridGraph::new(buses, branches) {
            Err(GridError::DanglingEndpoint { bus, .. }) => assert_eq!(bus, BusId(99)),
            other => panic!("expected dangling endpoint error, got {other:?}"),
        }
    }

    #[test]
    fn self_loop_rejected() {
        let err = GridGraph::from_branches(vec![Branch::line(1, 1, 10.0, 0.1, 0.1)]).unwrap_err();
        assert!(matches!(err, GridError::SelfLoop { .. }));
    }

    #[test]
    fn duplicate_bus_rejected() {
        let buses = vec![Bus::new(1), Bus::new(1)];
        let err = GridGraph::new(buses, vec![]).unwrap_err();
        assert!(matches!(err, GridError::DuplicateBus(BusId(1))));
    }

    #[test]
    fn open_branches_flagged_but_retained() {
        let mut br = Branch::line(1, 2, 100.0, 0.2, 0.35);
        br.status = BranchStatus::Open;
        let g = GridGraph::new(vec![Bus::new(1), Bus::new(2)], vec![br]).unwrap();
        assert_eq!(g.n_in_service_branches(), 0);
        assert_eq!(g.branches().len(), 1);
        assert!(g.simplified_edges().is_empty());
    }

    #[test]
    fn parallel_branches_collapse_in_simplified_view() {
        let g = GridGraph::from_branches(vec![
            Branch::line(1, 2, 100.0, 0.2, 0.35),
            Branch::line(2, 1, 50.0, 0.1, 0.2),
        ])
        .unwrap();
        assert_eq!(g.n_in_service_branches(), 2);
        assert_eq!(g.simplified_edges(), vec![(0, 1)]);
    }
}
