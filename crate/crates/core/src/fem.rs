//! Linear triangular elements for the one-group diffusion functional.
//!
//! For an element with vertices `(x_i, y_i)` the area coordinates are
//! `L_i = (c_i + b_i x + a_i y) / (2Δ)` with
//!
//! ```text
//! a_1 = x_3 - x_2   b_1 = y_2 - y_3   c_1 = x_2 y_3 - x_3 y_2
//! ```
//!
//! and cyclic permutations. The leakage matrix is `D / (4Δ) [a_i a_j + b_i b_j]`,
//! the absorption matrix `σΔ/12 [[2,1,1],[1,2,1],[1,1,2]]` and the source
//! vector `SΔ/3 (1, 1, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::sparse::{norm2, EnvelopeCholesky, SymMatrix};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub area: f64,
}

/// Material data of the diffusion equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// Diffusion coefficient `D`.
    pub d: f64,
    /// Absorption coefficient `σ`.
    pub sigma: f64,
    /// Source density `S`.
    pub source: f64,
}

impl Coefficients {
    pub fn new(d: f64, sigma: f64, source: f64) -> Result<Self> {
        let c = Self { d, sigma, source };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.sigma.is_finite() && self.source.is_finite()) {
            return Err(Error::NonFinite("coefficient"));
        }
        if !(self.d > 0.0) {
            return Err(Error::InvalidCoefficients(format!(
                "D must be positive, got {}",
                self.d
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidCoefficients(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.source < 0.0 {
            return Err(Error::InvalidCoefficients(format!(
                "S must be non-negative, got {}",
                self.source
            )));
        }
        Ok(())
    }
}

/// Right-hand operator used by the fission-normalized pencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    /// `Δ/12 [[2,1,1],[1,2,1],[1,1,2]]`, the absorption matrix at unit σ.
    #[default]
    Consistent,
    /// `Δ/3` on the diagonal.
    Lumped,
}

pub fn element_geometry(p1: Point, p2: Point, p3: Point) -> Result<ElementGeometry> {
    let [x1, y1] = p1;
    let [x2, y2] = p2;
    let [x3, y3] = p3;
    let a = [x3 - x2, x1 - x3, x2 - x1];
    let b = [y2 - y3, y3 - y1, y1 - y2];
    let c = [x2 * y3 - x3 * y2, x3 * y1 - x1 * y3, x1 * y2 - x2 * y1];
    let area = crate::mesh::signed_area(p1, p2, p3);
    let xs = [x1, x2, x3];
    let ys = [y1, y2, y3];
    let extent = |v: [f64; 3]| {
        v.iter().fold(f64::MIN, |m, &t| m.max(t)) - v.iter().fold(f64::MAX, |m, &t| m.min(t))
    };
    let scale = extent(xs).max(extent(ys));
    if !(area > 1e-14 * scale * scale) {
        return Err(Error::DegenerateElement { area });
    }
    Ok(ElementGeometry { a, b, c, area })
}

/// `∬ L1^p L2^q L3^r dΔ = p! q! r! / (p + q + r + 2)! · 2Δ`.
pub fn tri_integral(p: u32, q: u32, r: u32, area: f64) -> Result<f64> {
    if p + q + r + 2 > 20 {
        return Err(Error::InvalidArgument(format!(
            "exponent sum {} too large for exact factorials",
            p + q + r
        )));
    }
    if !(area > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "area must be positive, got {area}"
        )));
    }
    let fact = |n: u32| (1..=n as u64).product::<u64>() as f64;
    Ok(fact(p) * fact(q) * fact(r) / fact(p + q + r + 2) * 2.0 * area)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    /// Leakage.
    pub k1: Mat3,
    /// Absorption.
    pub k2: Mat3,
    /// Unit-coefficient mass.
    pub mass: Mat3,
    pub f: [f64; 3],
}

const PATTERN: Mat3 = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];

pub fn element_matrices(g: &ElementGeometry, c: &Coefficients) -> ElementMatrices {
    element_matrices_with(g, c, MassKind::Consistent)
}

pub fn element_matrices_with(
    g: &ElementGeometry,
    c: &Coefficients,
    mass: MassKind,
) -> ElementMatrices {
    let mut k1 = [[0.0; 3]; 3];
    let mut k2 = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    let leak = c.d / (4.0 * g.area);
    let absorb = c.sigma * g.area / 12.0;
    for i in 0..3 {
        for j in 0..3 {
            k1[i][j] = leak * (g.a[i] * g.a[j] + g.b[i] * g.b[j]);
            k2[i][j] = absorb * PATTERN[i][j];
            m[i][j] = match mass {
                MassKind::Consistent => g.area / 12.0 * PATTERN[i][j],
                MassKind::Lumped if i == j => g.area / 3.0,
                MassKind::Lumped => 0.0,
            };
        }
    }
    let fi = c.source * g.area / 3.0;
    ElementMatrices {
        k1,
        k2,
        mass: m,
        f: [fi; 3],
    }
}

/// Global matrices indexed by mesh node, possibly reduced by constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSystem {
    pub k1: SymMatrix,
    pub k2: SymMatrix,
    pub mass: SymMatrix,
    pub f: Vec<f64>,
    /// Original node index of each remaining row.
    pub free_nodes: Vec<usize>,
    /// Node count of the unreduced system.
    pub node_count: usize,
}

impl SymmetricSystem {
    pub fn dim(&self) -> usize {
        self.free_nodes.len()
    }

    /// Eliminates the rows and columns of the constrained nodes
    /// (homogeneous Dirichlet conditions). Indices refer to mesh nodes.
    pub fn apply_dirichlet(&self, constrained: &[usize]) -> Result<SymmetricSystem> {
        let mut fixed = vec![false; self.node_count];
        for &n in constrained {
            if n >= self.node_count {
                return Err(Error::NodeOutOfRange(n));
            }
            fixed[n] = true;
        }
        let keep: Vec<usize> = (0..self.dim())
            .filter(|&i| !fixed[self.free_nodes[i]])
            .collect();
        if keep.is_empty() {
            return Err(Error::AllNodesConstrained);
        }
        Ok(SymmetricSystem {
            k1: self.k1.principal_submatrix(&keep),
            k2: self.k2.principal_submatrix(&keep),
            mass: self.mass.principal_submatrix(&keep),
            f: keep.iter().map(|&i| self.f[i]).collect(),
            free_nodes: keep.iter().map(|&i| self.free_nodes[i]).collect(),
            node_count: self.node_count,
        })
    }

    /// Scatters a vector over the free nodes back to all mesh nodes, zero elsewhere.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.node_count];
        for (&n, &v) in self.free_nodes.iter().zip(reduced) {
            full[n] = v;
        }
        full
    }
}

pub fn assemble(mesh: &Mesh, c: &Coefficients) -> Result<SymmetricSystem> {
    assemble_with(mesh, c, MassKind::Consistent)
}

/// Index-mapped summation of the element contributions in element order.
pub fn assemble_with(mesh: &Mesh, c: &Coefficients, mass: MassKind) -> Result<SymmetricSystem> {
    c.validate()?;
    let n = mesh.node_count();
    let cap = 9 * mesh.element_count();
    let (mut k1, mut k2, mut mm) = (
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
        Vec::with_capacity(cap),
    );
    let mut f = vec![0.0; n];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let [p1, p2, p3] = mesh.element_points(e);
        let g = element_geometry(p1, p2, p3).map_err(|err| err.context(format!("element {e}")))?;
        let em = element_matrices_with(&g, c, mass);
        for i in 0..3 {
            for j in 0..3 {
                k1.push((tri[i], tri[j], em.k1[i][j]));
                k2.push((tri[i], tri[j], em.k2[i][j]));
                mm.push((tri[i], tri[j], em.mass[i][j]));
            }
            f[tri[i]] += em.f[i];
        }
    }
    Ok(SymmetricSystem {
        k1: SymMatrix::from_triplets(n, k1)?,
        k2: SymMatrix::from_triplets(n, k2)?,
        mass: SymMatrix::from_triplets(n, mm)?,
        f,
        free_nodes: (0..n).collect(),
        node_count: n,
    })
}

/// Solves `(K1 + K2) φ = f` with `φ = 0` on the constrained nodes.
pub fn solve_fixed_source(
    mesh: &Mesh,
    c: &Coefficients,
    constrained: &[usize],
) -> Result<Vec<f64>> {
    let sys = assemble(mesh, c)?.apply_dirichlet(constrained)?;
    let k = sys.k1.combine(1.0, &sys.k2, 1.0)?;
    let chol = EnvelopeCholesky::factor(&k).map_err(|_| Error::SingularSystem)?;
    let mut phi = chol.solve(&sys.f);
    let rhs_norm = norm2(&sys.f);
    if rhs_norm > 0.0 {
        // one step of iterative refinement
        let r: Vec<f64> = sys
            .f
            .iter()
            .zip(k.mul_vec(&phi))
            .map(|(b, kx)| b - kx)
            .collect();
        let dx = chol.solve(&r);
        phi.iter_mut().zip(dx).for_each(|(x, d)| *x += d);
        let r: Vec<f64> = sys
            .f
            .iter()
            .zip(k.mul_vec(&phi))
            .map(|(b, kx)| b - kx)
            .collect();
        if norm2(&r) > 1e-10 * rhs_norm {
            return Err(Error::SingularSystem);
        }
    }
    Ok(sys.expand(&phi))
}
