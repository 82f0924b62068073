//! Quantum graphs: data model, bond scattering matrix, secular-equation
//! roots, the symplectic doubling with circulators and length sweeps.

mod secular;

pub use secular::{
    bond_scattering_matrix, eigenphases, evaluate, find_eigenvalues, find_roots, GraphEigenvalues,
    RootSearch, SecularEvaluation,
};

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Incoming port `a` exits through port `a + 1 (mod 3)`.
    Cyclic,
    /// Incoming port `a` exits through port `a − 1 (mod 3)`.
    Anticyclic,
}

impl Orientation {
    pub fn reversed(self) -> Self {
        match self {
            Orientation::Cyclic => Orientation::Anticyclic,
            Orientation::Anticyclic => Orientation::Cyclic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexKind {
    /// Kirchhoff–Neumann matching, `σ = 2/v − δ`.
    Neumann,
    /// Three-port circulator; `ports` lists the incident bond indices in
    /// port order.
    Circulator {
        orientation: Orientation,
        ports: [usize; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    #[serde(flatten)]
    pub kind: VertexKind,
}

/// An undirected bond between vertex ids `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    /// Optical length [m].
    pub length: f64,
    /// Extra phase picked up travelling `i → j` [rad].
    #[serde(skip)]
    pub phase_ij: f64,
    /// Extra phase picked up travelling `j → i` [rad].
    #[serde(skip)]
    pub phase_ji: f64,
}

impl Bond {
    pub fn new(i: usize, j: usize, length: f64) -> Self {
        Bond {
            i,
            j,
            length,
            phase_ij: 0.0,
            phase_ji: 0.0,
        }
    }

    pub fn with_phases(mut self, phase_ij: f64, phase_ji: f64) -> Self {
        self.phase_ij = phase_ij;
        self.phase_ji = phase_ji;
        self
    }
}

/// On-disk layout: phases live in their own array parallel to `bonds`.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<Vertex>,
    bonds: Vec<Bond>,
    #[serde(default)]
    phases: Vec<[f64; 2]>,
}

/// A validated quantum graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    vertices: Vec<Vertex>,
    bonds: Vec<Bond>,
    index: BTreeMap<usize, usize>,
}

/// One end of a bond: `(bond, 0)` sits at `bond.i`, `(bond, 1)` at `bond.j`.
pub type Port = (usize, usize);

impl GraphSpec {
    /// Checks connectivity, positive lengths, unique ids and circulator
    /// valency.
    pub fn new(vertices: Vec<Vertex>, bonds: Vec<Bond>) -> Result<Self> {
        if vertices.is_empty() || bonds.is_empty() {
            return Err(Error::invalid(
                "graph needs at least one vertex and one bond",
            ));
        }
        let mut index = BTreeMap::new();
        for (n, v) in vertices.iter().enumerate() {
            if index.insert(v.id, n).is_some() {
                return Err(Error::invalid(format!("duplicate vertex id {}", v.id)));
            }
        }
        for (b, bond) in bonds.iter().enumerate() {
            for end in [bond.i, bond.j] {
                if !index.contains_key(&end) {
                    return Err(Error::invalid(format!(
                        "bond {b} references unknown vertex {end}"
                    )));
                }
            }
            if !(bond.length > 0.0 && bond.length.is_finite()) {
                return Err(Error::invalid(format!(
                    "bond {b} has non-positive length {}",
                    bond.length
                )));
            }
            if !(bond.phase_ij.is_finite() && bond.phase_ji.is_finite()) {
                return Err(Error::invalid(format!("bond {b} has a non-finite phase")));
            }
        }
        let g = GraphSpec {
            vertices,
            bonds,
            index,
        };
        for v in &g.vertices {
            if let VertexKind::Circulator { ports, .. } = &v.kind {
                let incident = g.ports(v.id);
                let mut listed: Vec<usize> = ports.to_vec();
                listed.sort_unstable();
                let mut actual: Vec<usize> = incident.iter().map(|p| p.0).collect();
                actual.sort_unstable();
                if incident.len() != 3
                    || listed != actual
                    || listed.windows(2).any(|w| w[0] == w[1])
                {
                    return Err(Error::invalid(format!(
                        "circulator {} must have exactly three distinct non-loop bonds matching its port list",
                        v.id
                    )));
                }
            }
        }
        if !g.is_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn vertex(&self, id: usize) -> Option<&Vertex> {
        self.index.get(&id).map(|&n| &self.vertices[n])
    }

    /// Total optical length `𝓛 = Σ L_ij`.
    pub fn total_length(&self) -> f64 {
        self.bonds.iter().map(|b| b.length).sum()
    }

    /// Smooth level count in `(k_min, k_max)`: `𝓛 Δk / π`.
    pub fn weyl_count(&self, k_min: f64, k_max: f64) -> f64 {
        self.total_length() * (k_max - k_min) / std::f64::consts::PI
    }

    pub fn has_circulator(&self) -> bool {
        self.vertices
            .iter()
            .any(|v| matches!(v.kind, VertexKind::Circulator { .. }))
    }

    /// Ports of vertex `id` in stored order: circulator port order, or
    /// by bond then end for Neumann vertices.
    pub fn ports(&self, id: usize) -> Vec<Port> {
        if let Some(Vertex {
            kind: VertexKind::Circulator { ports, .. },
            ..
        }) = self.vertex(id)
        {
            let mapped: Vec<Port> = ports
                .iter()
                .filter_map(|&b| {
                    let bond = self.bonds.get(b)?;
                    match (bond.i == id, bond.j == id) {
                        (true, false) => Some((b, 0)),
                        (false, true) => Some((b, 1)),
                        _ => None,
                    }
                })
                .collect();
            if mapped.len() == 3 {
                return mapped;
            }
        }
        let mut out = Vec::new();
        for (b, bond) in self.bonds.iter().enumerate() {
            if bond.i == id {
                out.push((b, 0));
            }
            if bond.j == id {
                out.push((b, 1));
            }
        }
        out
    }

    pub fn valency(&self, id: usize) -> usize {
        self.bonds
            .iter()
            .map(|b| usize::from(b.i == id) + usize::from(b.j == id))
            .sum()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            let id = self.vertices[n].id;
            for b in &self.bonds {
                let other = if b.i == id {
                    b.j
                } else if b.j == id {
                    b.i
                } else {
                    continue;
                };
                let m = self.index[&other];
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// The same graph with every circulator reversed and every directed
    /// phase swapped: the time-reversed graph.
    pub fn time_reversed(&self) -> GraphSpec {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id,
                kind: match &v.kind {
                    VertexKind::Neumann => VertexKind::Neumann,
                    VertexKind::Circulator { orientation, ports } => VertexKind::Circulator {
                        orientation: orientation.reversed(),
                        ports: *ports,
                    },
                },
            })
            .collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| b.with_phases(b.phase_ji, b.phase_ij))
            .collect();
        GraphSpec {
            vertices,
            bonds,
            index: self.index.clone(),
        }
    }

    fn with_lengths(&self, lengths: &[f64]) -> Result<GraphSpec> {
        let bonds = self
            .bonds
            .iter()
            .zip(lengths)
            .map(|(b, &l)| Bond { length: l, ..*b })
            .collect();
        GraphSpec::new(self.vertices.clone(), bonds)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.vertices.clone(),
            bonds: self.bonds.clone(),
            phases: self
                .bonds
                .iter()
                .map(|b| [b.phase_ij, b.phase_ji])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<GraphSpec> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("graph file: {e}")))?;
        if !file.phases.is_empty() && file.phases.len() != file.bonds.len() {
            return Err(Error::invalid(format!(
                "graph file lists {} phase pairs for {} bonds",
                file.phases.len(),
                file.bonds.len()
            )));
        }
        let bonds = file
            .bonds
            .iter()
            .enumerate()
            .map(|(n, b)| match file.phases.get(n) {
                Some(p) => b.with_phases(p[0], p[1]),
                None => *b,
            })
            .collect();
        GraphSpec::new(file.vertices, bonds)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<GraphSpec> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GraphSpec::from_json(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Single bond of length `l` between two valency-one Neumann vertices.
pub fn interval(l: f64) -> Result<GraphSpec> {
    GraphSpec::new(neumann(2), vec![Bond::new(0, 1, l)])
}

/// Ring of two Neumann vertices joined by two bonds.
pub fn circle(l1: f64, l2: f64) -> Result<GraphSpec> {
    GraphSpec::new(neumann(2), vec![Bond::new(0, 1, l1), Bond::new(1, 0, l2)])
}

fn neumann(n: usize) -> Vec<Vertex> {
    (0..n)
        .map(|id| Vertex {
            id,
            kind: VertexKind::Neumann,
        })
        .collect()
}

/// True when `a/b` lies within `1e-12` (relative) of some `p/q` with
/// `p, q ≤ 10`.
pub fn nearly_rational_ratio(a: f64, b: f64) -> bool {
    let r = a / b;
    (1..=10).any(|p| (1..=10).any(|q| (r - f64::from(p) / f64::from(q)).abs() <= 1e-12 * r))
}

/// Fails if any two bond lengths have a nearly rational ratio.
pub fn check_incommensurable(g: &GraphSpec) -> Result<()> {
    let b = g.bonds();
    for x in 0..b.len() {
        for y in x + 1..b.len() {
            if nearly_rational_ratio(b[x].length, b[y].length) {
                return Err(Error::invalid(format!(
                    "bond lengths {} and {} (bonds {x}, {y}) have a nearly rational ratio",
                    b[x].length, b[y].length
                )));
            }
        }
    }
    Ok(())
}

/// Vertex id offset of the mirrored copy in [`build_gse_double`].
pub fn mirror_offset(sub: &GraphSpec) -> usize {
    sub.vertices().iter().map(|v| v.id).max().unwrap_or(0) + 1
}

/// Two copies of a unitary graph joined into one with a symplectic
/// antiunitary symmetry.
///
/// The copy carries the ids `n + offset` ([`mirror_offset`]), reversed
/// circulators and swapped directed phases. `coupling` names the two bonds
/// `(a, b)` joining sub vertex `a` to the copy of `b`; they must mirror each
/// other, `coupling[1] == (coupling[0].1, coupling[0].0)`, and receive phases
/// `(+π/2, −π/2)` and `(−π/2, +π/2)`.
pub fn build_gse_double(
    sub: &GraphSpec,
    coupling: [(usize, usize); 2],
    coupling_length: f64,
) -> Result<GraphSpec> {
    if !sub.has_circulator() {
        return Err(Error::invalid(
            "subgraph has no circulator, so there is no time-reversal breaking to mirror",
        ));
    }
    if !(coupling_length > 0.0 && coupling_length.is_finite()) {
        return Err(Error::invalid(format!(
            "coupling length must be positive, got {coupling_length}"
        )));
    }
    let [(a, b), (c, d)] = coupling;
    if (c, d) != (b, a) {
        return Err(Error::invalid(format!(
            "coupling bonds ({a}, {b}) and ({c}, {d}) are not mirror images; expected ({b}, {a})"
        )));
    }
    for v in [a, b] {
        match sub.vertex(v) {
            None => {
                return Err(Error::invalid(format!(
                    "coupling vertex {v} does not exist"
                )))
            }
            Some(Vertex {
                kind: VertexKind::Circulator { .. },
                ..
            }) => {
                return Err(Error::invalid(format!(
                    "coupling vertex {v} is a circulator with no spare port"
                )))
            }
            _ => {}
        }
    }
    let off = mirror_offset(sub);
    let mirror = sub.time_reversed();
    let nb = sub.bonds().len();
    let mut vertices = sub.vertices().to_vec();
    vertices.extend(mirror.vertices().iter().map(|v| Vertex {
        id: v.id + off,
        kind: match &v.kind {
            VertexKind::Circulator { orientation, ports } => VertexKind::Circulator {
                orientation: *orientation,
                ports: ports.map(|p| p + nb),
            },
            k => k.clone(),
        },
    }));
    let mut bonds = sub.bonds().to_vec();
    bonds.extend(mirror.bonds().iter().map(|bd| Bond {
        i: bd.i + off,
        j: bd.j + off,
        ..*bd
    }));
    bonds.push(Bond::new(a, b + off, coupling_length).with_phases(FRAC_PI_2, -FRAC_PI_2));
    bonds.push(Bond::new(b, a + off, coupling_length).with_phases(-FRAC_PI_2, FRAC_PI_2));
    GraphSpec::new(vertices, bonds)
}

/// Parametric family: at step `m`, both `plus_pair` bonds grow by `m·Δl` and
/// both `minus_pair` bonds shrink by `m·Δl`, so `𝓛` is unchanged.
///
/// Returns `max(n_steps, 1)` graphs, `m = 0, 1, …`.
pub fn sweep_lengths(
    g: &GraphSpec,
    plus_pair: [usize; 2],
    minus_pair: [usize; 2],
    delta_l: f64,
    n_steps: usize,
) -> Result<Vec<GraphSpec>> {
    let ids = [plus_pair[0], plus_pair[1], minus_pair[0], minus_pair[1]];
    for (n, &b) in ids.iter().enumerate() {
        if b >= g.bonds().len() {
            return Err(Error::invalid(format!("bond {b} does not exist")));
        }
        if ids[..n].contains(&b) {
            return Err(Error::invalid(format!(
                "sweep bonds must be distinct; bond {b} repeats"
            )));
        }
    }
    if !delta_l.is_finite() {
        return Err(Error::invalid("length increment must be finite"));
    }
    let base: Vec<f64> = g.bonds().iter().map(|b| b.length).collect();
    (0..n_steps.max(1))
        .map(|m| {
            let shift = m as f64 * delta_l;
            let mut lengths = base.clone();
            for &b in &plus_pair {
                lengths[b] += shift;
            }
            for &b in &minus_pair {
                lengths[b] -= shift;
            }
            if let Some(&b) = ids.iter().find(|&&b| lengths[b] <= 0.0) {
                return Err(Error::invalid(format!(
                    "step {m}: bond {b} would have length {}",
                    lengths[b]
                )));
            }
            g.with_lengths(&lengths)
        })
        .collect()
}

/// Layout of the random unitary subgraphs: an 8-cycle with chords
/// `1–5`, `2–6`, `3–7` and a circulator at vertex 5. Vertices 0 and 4
/// keep valency two and take the coupling bonds.
pub const LAYOUT_EDGES: [(usize, usize); 11] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 0),
    (1, 5),
    (2, 6),
    (3, 7),
];
pub const LAYOUT_CIRCULATOR: usize = 5;
pub const LAYOUT_COUPLING: [(usize, usize); 2] = [(0, 4), (4, 0)];

/// Doubled graph on the fixed layout with random incommensurable lengths
/// drawn from `[0.2, 1.0]` m and scaled to the total length.
///
/// Returns the doubled graph and the mirrored bond pairs `(b, b̄)` suited
/// to [`sweep_lengths`].
pub fn random_gse_graph<R: Rng>(
    rng: &mut R,
    total_length: f64,
) -> Result<(GraphSpec, [[usize; 2]; 2])> {
    if !(total_length > 0.0) {
        return Err(Error::invalid(format!(
            "total length must be positive, got {total_length}"
        )));
    }
    let nb = LAYOUT_EDGES.len();
    let lengths = loop {
        let l: Vec<f64> = (0..=nb).map(|_| rng.random_range(0.2..1.0)).collect();
        let ok = (0..l.len()).all(|x| (x + 1..l.len()).all(|y| !nearly_rational_ratio(l[x], l[y])));
        if ok {
            break l;
        }
    };
    let scale = total_length / (2.0 * lengths.iter().sum::<f64>());
    let bonds: Vec<Bond> = LAYOUT_EDGES
        .iter()
        .zip(&lengths)
        .map(|(&(i, j), &l)| Bond::new(i, j, l * scale))
        .collect();
    let ports: Vec<usize> = LAYOUT_EDGES
        .iter()
        .enumerate()
        .filter(|(_, e)| e.0 == LAYOUT_CIRCULATOR || e.1 == LAYOUT_CIRCULATOR)
        .map(|(b, _)| b)
        .collect();
    let mut vertices = neumann(8);
    vertices[LAYOUT_CIRCULATOR].kind = VertexKind::Circulator {
        orientation: Orientation::Cyclic,
        ports: [ports[0], ports[1], ports[2]],
    };
    let sub = GraphSpec::new(vertices, bonds)?;
    let g = build_gse_double(&sub, LAYOUT_COUPLING, lengths[nb] * scale)?;
    // Two bonds away from the circulator and the coupling vertices.
    let (p, q) = (1, 9);
    Ok((g, [[p, p + nb], [q, q + nb]]))
}
