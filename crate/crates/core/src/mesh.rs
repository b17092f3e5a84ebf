//! Triangulations of the equilateral-triangle domain.
//!
//! Every mesh starts from the six-triangle median fan (three vertices,
//! three edge midpoints and the centroid). Two refinement rules grow it:
//! [`refine4`] splits each triangle into four congruent children through
//! its edge midpoints, and [`refine2`] bisects each triangle across its
//! longest edge. Refinement never renumbers existing nodes, so the centroid
//! keeps its index through every level.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    centroid_node: Option<usize>,
}

/// Refinement family of the convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Median fan followed by 4-fold refinements: 6, 24, 96, ...
    Fan,
    /// Bisected fan followed by 4-fold refinements: 12, 48, 192, ...
    Bisected,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Fan, Family::Bisected];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Fan => "fan",
            Family::Bisected => "bisected",
        }
    }

    pub fn element_count(&self, level: u32) -> usize {
        let base = match self {
            Family::Fan => 6,
            Family::Bisected => 12,
        };
        base * 4usize.pow(level)
    }

    /// Mesh at the given refinement level of this family.
    pub fn build(&self, side: f64, level: u32) -> Result<Mesh> {
        let mut mesh = base_fan6(side)?;
        if *self == Family::Bisected {
            mesh = refine2(&mesh)?;
        }
        for _ in 0..level {
            mesh = refine4(&mesh);
        }
        Ok(mesh)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fan" => Ok(Family::Fan),
            "bisected" => Ok(Family::Bisected),
            other => Err(Error::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Signed area of the triangle, half the determinant of
/// `[[1, 1, 1], [x1, x2, x3], [y1, y2, y3]]`.
pub fn signed_area(p1: Point, p2: Point, p3: Point) -> f64 {
    0.5 * ((p2[0] * p3[1] - p3[0] * p2[1]) - (p1[0] * p3[1] - p3[0] * p1[1])
        + (p1[0] * p2[1] - p2[0] * p1[1]))
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh and classifies its boundary from edge incidence.
    pub fn new(
        nodes: Vec<Point>,
        elements: Vec<[usize; 3]>,
        centroid_node: Option<usize>,
    ) -> Result<Self> {
        if nodes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("node coordinate"));
        }
        if elements.is_empty() {
            return Err(Error::InvalidMesh("no elements".into()));
        }
        for (e, tri) in elements.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} references a missing node"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("element {e} repeats a node")));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "element {e} is not counterclockwise (area {area:e})"
                )));
            }
        }
        if let Some(c) = centroid_node {
            if c >= nodes.len() {
                return Err(Error::InvalidMesh("centroid index out of range".into()));
            }
        }
        let boundary_nodes = boundary_from_edges(&elements)?;
        Ok(Self {
            nodes,
            elements,
            boundary_nodes,
            centroid_node,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    /// Sorted indices of nodes on the domain boundary.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn centroid_node(&self) -> Option<usize> {
        self.centroid_node
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_points(&self, e: usize) -> [Point; 3] {
        let [i, j, k] = self.elements[e];
        [self.nodes[i], self.nodes[j], self.nodes[k]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [p1, p2, p3] = self.element_points(e);
        signed_area(p1, p2, p3)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Mesh> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "geometry scale must be positive, got {factor}"
            )));
        }
        let mut out = self.clone();
        for p in &mut out.nodes {
            p[0] *= factor;
            p[1] *= factor;
        }
        Ok(out)
    }

    fn with_elements(&self, nodes: Vec<Point>, elements: Vec<[usize; 3]>) -> Mesh {
        let boundary_nodes =
            boundary_from_edges(&elements).expect("refinement produces a manifold mesh");
        Mesh {
            nodes,
            elements,
            boundary_nodes,
            centroid_node: self.centroid_node,
        }
    }
}

/// Nodes of edges that belong to exactly one element.
fn boundary_from_edges(elements: &[[usize; 3]]) -> Result<Vec<usize>> {
    let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in elements {
        for k in 0..3 {
            *incidence
                .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                .or_default() += 1;
        }
    }
    let mut boundary = BTreeSet::new();
    for (&(a, b), &count) in &incidence {
        match count {
            1 => {
                boundary.insert(a);
                boundary.insert(b);
            }
            2 => {}
            _ => {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) is shared by {count} elements"
                )))
            }
        }
    }
    Ok(boundary.into_iter().collect())
}

/// Six-triangle median fan of the equilateral triangle with the given side.
pub fn base_fan6(side: f64) -> Result<Mesh> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "side must be positive, got {side}"
        )));
    }
    let h = side * 3f64.sqrt() / 2.0;
    let v0 = [0.0, 0.0];
    let v1 = [side, 0.0];
    let v2 = [0.5 * side, h];
    let centroid = [0.5 * side, h / 3.0];
    let nodes = vec![
        v0,
        v1,
        v2,
        midpoint(v0, v1),
        midpoint(v1, v2),
        midpoint(v2, v0),
        centroid,
    ];
    let elements = vec![
        [0, 3, 6],
        [3, 1, 6],
        [1, 4, 6],
        [4, 2, 6],
        [2, 5, 6],
        [5, 0, 6],
    ];
    Mesh::new(nodes, elements, Some(6))
}

/// Splits every triangle into four through its edge midpoints.
pub fn refine4(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
        *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
            nodes.push(midpoint(nodes[a], nodes[b]));
            nodes.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(4 * mesh.elements.len());
    for &[i, j, k] in &mesh.elements {
        let ij = mid(i, j, &mut nodes);
        let jk = mid(j, k, &mut nodes);
        let ki = mid(k, i, &mut nodes);
        elements.push([i, ij, ki]);
        elements.push([ij, j, jk]);
        elements.push([ki, jk, k]);
        elements.push([ij, jk, ki]);
    }
    mesh.with_elements(nodes, elements)
}

/// Local index `k` of the edge `(tri[k], tri[k+1])` chosen for bisection.
fn longest_edge(mesh: &Mesh, tri: &[usize; 3]) -> usize {
    let len2 = |k: usize| {
        let a = mesh.nodes[tri[k]];
        let b = mesh.nodes[tri[(k + 1) % 3]];
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
    };
    let longest = (0..3).map(len2).fold(0.0, f64::max);
    (0..3)
        .filter(|&k| len2(k) >= longest * (1.0 - 1e-12))
        .min_by_key(|&k| edge_key(tri[k], tri[(k + 1) % 3]))
        .expect("a triangle has three edges")
}

/// Bisects every triangle from the midpoint of its longest edge to the
/// opposite vertex. Ties go to the edge with the lowest node indices.
pub fn refine2(mesh: &Mesh) -> Result<Mesh> {
    let choices: Vec<usize> = mesh
        .elements
        .iter()
        .map(|t| longest_edge(mesh, t))
        .collect();

    let mut split: HashMap<(usize, usize), usize> = HashMap::new();
    for (tri, &k) in mesh.elements.iter().zip(&choices) {
        *split.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
    }
    for tri in &mesh.elements {
        for k in 0..3 {
            let key = edge_key(tri[k], tri[(k + 1) % 3]);
            let interior = mesh.elements.iter().filter(|t| shares_edge(t, key)).count() == 2;
            if interior && split.get(&key).is_some_and(|&c| c != 2) {
                return Err(Error::NonConformingSplit(key.0, key.1));
            }
        }
    }

    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::with_capacity(2 * mesh.elements.len());
    for (tri, &k) in mesh.elements.iter().zip(&choices) {
        let p = tri[k];
        let q = tri[(k + 1) % 3];
        let r = tri[(k + 2) % 3];
        let m = *midpoints.entry(edge_key(p, q)).or_insert_with(|| {
            nodes.push(midpoint(nodes[p], nodes[q]));
            nodes.len() - 1
        });
        elements.push([r, p, m]);
        elements.push([r, m, q]);
    }
    Ok(mesh.with_elements(nodes, elements))
}

fn shares_edge(tri: &[usize; 3], key: (usize, usize)) -> bool {
    (0..3).any(|k| edge_key(tri[k], tri[(k + 1) % 3]) == key)
}
