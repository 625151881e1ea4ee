//! Weighted graphs and the graph states they define.
//!
//! Vertex `v` of a [`WeightedGraph`] is qubit `v` of the state returned by
//! [`WeightedGraph::build_state`]. Every edge `(i, j, θ)` contributes a
//! `CZ^θ = diag(1, 1, 1, e^{iθ})`; these commute, so edge order is irrelevant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::Phase;
use crate::qstate::{self, Ket, QStateError, SingleQubitUnitary, StateVector};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) has zero weight")]
    ZeroWeight(usize, usize),
    #[error("vertex {vertex} out of range for {count} vertices")]
    Vertex { vertex: usize, count: usize },
    #[error("input role {0:?} assigned twice")]
    DuplicateRole(Role),
    #[error("malformed graph document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// Logical role of an input vertex.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    C1,
    C2,
    T,
    None,
}

/// How the vertex state is loaded: as given, or with a Hadamard applied
/// first (encoding in the H basis).
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Computational,
    Hadamard,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedState {
    #[default]
    Plus,
    Minus,
    Zero,
    One,
}

impl NamedState {
    pub fn ket(self) -> Ket {
        match self {
            Self::Plus => qstate::ket_plus(),
            Self::Minus => qstate::ket_minus(),
            Self::Zero => qstate::ket_zero(),
            Self::One => qstate::ket_one(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputAssignment {
    pub role: Role,
    #[serde(default)]
    pub basis: Encoding,
    #[serde(default)]
    pub state: NamedState,
}

impl InputAssignment {
    pub fn new(role: Role) -> Self {
        Self { role, basis: Encoding::Computational, state: NamedState::Plus }
    }

    pub fn ket(&self) -> Ket {
        let k = self.state.ket();
        match self.basis {
            Encoding::Computational => k,
            Encoding::Hadamard => SingleQubitUnitary::hadamard().apply_ket(&k),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: Phase,
}

impl Edge {
    pub fn is_maximal(&self) -> bool {
        self.weight == Phase::pi()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    inputs: BTreeMap<usize, InputAssignment>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize) -> Self {
        Self { vertex_count, edges: Vec::new(), inputs: BTreeMap::new() }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn inputs(&self) -> &BTreeMap<usize, InputAssignment> {
        &self.inputs
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.vertex_count {
            return Err(GraphError::Vertex { vertex: v, count: self.vertex_count });
        }
        Ok(())
    }

    /// Add an undirected edge; endpoints are stored in ascending order.
    pub fn add_edge(&mut self, a: usize, b: usize, weight: Phase) -> Result<(), GraphError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let (a, b) = (a.min(b), a.max(b));
        if self.edges.iter().any(|e| e.a == a && e.b == b) {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        if weight.is_zero() {
            return Err(GraphError::ZeroWeight(a, b));
        }
        self.edges.push(Edge { a, b, weight });
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Option<Edge> {
        let (a, b) = (a.min(b), a.max(b));
        let pos = self.edges.iter().position(|e| e.a == a && e.b == b)?;
        Some(self.edges.remove(pos))
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<Phase> {
        let (a, b) = (a.min(b), a.max(b));
        self.edges.iter().find(|e| e.a == a && e.b == b).map(|e| e.weight)
    }

    pub fn neighbors(&self, v: usize) -> Vec<(usize, Phase)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter_map(|e| match (e.a == v, e.b == v) {
                (true, _) => Some((e.b, e.weight)),
                (_, true) => Some((e.a, e.weight)),
                _ => None,
            })
            .collect();
        out.sort_by_key(|(u, _)| *u);
        out
    }

    pub fn set_input(&mut self, v: usize, assignment: InputAssignment) -> Result<(), GraphError> {
        self.check_vertex(v)?;
        if assignment.role != Role::None
            && self.inputs.iter().any(|(&u, a)| u != v && a.role == assignment.role)
        {
            return Err(GraphError::DuplicateRole(assignment.role));
        }
        self.inputs.insert(v, assignment);
        Ok(())
    }

    pub fn vertex_with_role(&self, role: Role) -> Option<usize> {
        self.inputs.iter().find(|(_, a)| a.role == role).map(|(&v, _)| v)
    }

    /// Graph on `vertex_count - 1` vertices with `v` deleted; higher labels shift down.
    pub fn without_vertex(&self, v: usize) -> Result<Self, GraphError> {
        self.check_vertex(v)?;
        let shift = |u: usize| if u > v { u - 1 } else { u };
        let mut g = Self::new(self.vertex_count - 1);
        for e in self.edges.iter().filter(|e| e.a != v && e.b != v) {
            g.add_edge(shift(e.a), shift(e.b), e.weight)?;
        }
        for (&u, a) in self.inputs.iter().filter(|(&u, _)| u != v) {
            g.set_input(shift(u), *a)?;
        }
        Ok(g)
    }

    fn entangle(&self, s: &mut StateVector) -> Result<(), GraphError> {
        for e in &self.edges {
            s.apply_cz_theta(e.a, e.b, e.weight)?;
        }
        Ok(())
    }

    /// Each vertex in its assigned input state (`|+⟩` by default), then every edge.
    pub fn build_state(&self) -> Result<StateVector, GraphError> {
        let kets: Vec<Ket> = (0..self.vertex_count)
            .map(|v| self.inputs.get(&v).map_or_else(qstate::ket_plus, |a| a.ket()))
            .collect();
        let mut s = StateVector::product(&kets)?;
        self.entangle(&mut s)?;
        Ok(s)
    }

    /// Embed an arbitrary (possibly entangled) logical state: qubit `i` of
    /// `input` is placed on vertex `input_vertices[i]`, every other vertex
    /// starts in `|+⟩`, then the edges are applied.
    pub fn build_state_with(&self, input: &StateVector, input_vertices: &[usize]) -> Result<StateVector, GraphError> {
        if input.num_qubits() != input_vertices.len() {
            return Err(QStateError::Dimension { expected: input_vertices.len(), got: input.num_qubits() }.into());
        }
        for &v in input_vertices {
            self.check_vertex(v)?;
        }
        let rest: Vec<usize> = (0..self.vertex_count).filter(|v| !input_vertices.contains(v)).collect();
        let mut s = if rest.is_empty() {
            input.clone()
        } else {
            let plus = StateVector::plus_state(rest.len())?;
            input.tensor(&plus)?
        };
        // current qubit order: input_vertices ++ rest; move qubit for vertex v to position v
        let current: Vec<usize> = input_vertices.iter().chain(&rest).copied().collect();
        let order: Vec<usize> = (0..self.vertex_count)
            .map(|v| current.iter().position(|&u| u == v).unwrap())
            .collect();
        s = s.reorder(&order)?;
        self.entangle(&mut s)?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDoc::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    vertices: usize,
    edges: Vec<(usize, usize, Phase)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    inputs: BTreeMap<usize, InputAssignment>,
}

impl From<&WeightedGraph> for GraphDoc {
    fn from(g: &WeightedGraph) -> Self {
        let mut edges: Vec<_> = g.edges.iter().map(|e| (e.a, e.b, e.weight)).collect();
        edges.sort_by_key(|e| (e.0, e.1));
        Self { vertices: g.vertex_count, edges, inputs: g.inputs.clone() }
    }
}

impl TryFrom<GraphDoc> for WeightedGraph {
    type Error = GraphError;
    fn try_from(doc: GraphDoc) -> Result<Self, GraphError> {
        let mut g = WeightedGraph::new(doc.vertices);
        for (a, b, w) in doc.edges {
            g.add_edge(a, b, w)?;
        }
        for (v, a) in doc.inputs {
            g.set_input(v, a)?;
        }
        Ok(g)
    }
}
