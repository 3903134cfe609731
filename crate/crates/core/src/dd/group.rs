//! Finite rotation groups in SO(3), their Cayley graphs, and Eulerian cycles.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use crate::error::{Error, Result};

const MATCH_TOL: f64 = 1e-9;
const MAX_ORDER: usize = 240;

/// Rotation by `angle` about `axis` (normalized here).
pub fn axis_angle_matrix(axis: [f64; 3], angle: f64) -> Result<Matrix3<f64>> {
    let v = Vector3::from(axis);
    if v.norm() < 1e-12 {
        return Err(Error::InvalidArgument("zero rotation axis".into()));
    }
    Ok(*Rotation3::from_axis_angle(&Unit::new_normalize(v), angle).matrix())
}

/// Axis and angle in [0, π] of a rotation matrix; `None` for the identity.
///
/// The axis comes from the symmetric part (1 − cos θ) n nᵀ, which stays well
/// conditioned at θ = π, and its sign from the antisymmetric part.
pub fn matrix_axis_angle(m: &Matrix3<f64>) -> Option<([f64; 3], f64)> {
    let cos = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let v = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let angle = (0.5 * v.norm()).atan2(cos);
    if angle < 1e-12 {
        return None;
    }
    let b = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos;
    let k = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .unwrap();
    let mut n = b.column(k).normalize();
    if n.dot(&v) < 0.0 {
        n = -n;
    }
    Some(([n.x, n.y, n.z], angle))
}

fn same(a: &Matrix3<f64>, b: &Matrix3<f64>) -> bool {
    (a - b).amax() < MATCH_TOL
}

/// A finite subgroup of SO(3) closed from a list of generators.
/// `elements()[0]` is the identity.
#[derive(Clone, Debug)]
pub struct RotationGroup {
    elements: Vec<Matrix3<f64>>,
    generators: Vec<Matrix3<f64>>,
    table: Vec<Vec<usize>>,
}

impl RotationGroup {
    pub fn generate(generators: &[Matrix3<f64>]) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Sequence("no generators".into()));
        }
        let mut elements = vec![Matrix3::identity()];
        let mut head = 0;
        while head < elements.len() {
            let g = elements[head];
            for s in generators {
                let next = s * g;
                if !elements.iter().any(|e| same(e, &next)) {
                    if elements.len() == MAX_ORDER {
                        return Err(Error::Sequence(format!("group order exceeds {MAX_ORDER}")));
                    }
                    elements.push(next);
                }
            }
            head += 1;
        }
        let table = elements
            .iter()
            .map(|g| {
                generators
                    .iter()
                    .map(|s| {
                        let next = s * g;
                        elements
                            .iter()
                            .position(|e| same(e, &next))
                            .expect("closed")
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            elements,
            generators: generators.to_vec(),
            table,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Matrix3<f64>] {
        &self.elements
    }

    pub fn generators(&self) -> &[Matrix3<f64>] {
        &self.generators
    }

    pub fn index_of(&self, m: &Matrix3<f64>) -> Option<usize> {
        self.elements.iter().position(|e| same(e, m))
    }

    /// Vertex reached from `vertex` by applying generator `label`.
    pub fn successor(&self, vertex: usize, label: usize) -> usize {
        self.table[vertex][label]
    }

    /// Vertices visited by a pulse order starting from the identity,
    /// including the start (length = pulses + 1).
    pub fn walk(&self, order: &[usize]) -> Result<Vec<usize>> {
        let mut v = 0;
        let mut out = vec![0];
        for &l in order {
            if l >= self.generators.len() {
                return Err(Error::Sequence(format!("pulse label {l} has no generator")));
            }
            v = self.successor(v, l);
            out.push(v);
        }
        Ok(out)
    }

    /// Checks that `order` is a closed walk using every Cayley edge exactly once.
    pub fn check_eulerian(&self, order: &[usize]) -> Result<()> {
        let k = self.generators.len();
        let expected = self.order() * k;
        if order.len() != expected {
            return Err(Error::Sequence(format!(
                "{} pulses, Eulerian cycle needs {expected}",
                order.len()
            )));
        }
        let visits = self.walk(order)?;
        let mut used = vec![false; expected];
        for (step, &l) in order.iter().enumerate() {
            let e = visits[step] * k + l;
            if used[e] {
                return Err(Error::Sequence(format!(
                    "edge ({}, {l}) used twice",
                    visits[step]
                )));
            }
            used[e] = true;
        }
        if *visits.last().unwrap() != 0 {
            return Err(Error::Sequence(
                "pulse order does not return to the identity".into(),
            ));
        }
        Ok(())
    }
}

/// Hierholzer cycle through every (vertex, generator) edge of the Cayley graph,
/// starting and ending at the identity. Returns generator labels in pulse order.
pub fn eulerian_order(group: &RotationGroup) -> Result<Vec<usize>> {
    let k = group.generators.len();
    let n = group.order();
    let mut next_label = vec![0usize; n];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(0, None)];
    let mut circuit: Vec<Option<usize>> = Vec::with_capacity(n * k + 1);
    while let Some(&(v, _)) = stack.last() {
        if next_label[v] < k {
            let l = next_label[v];
            next_label[v] += 1;
            stack.push((group.successor(v, l), Some(l)));
        } else {
            circuit.push(stack.pop().unwrap().1);
        }
    }
    circuit.reverse();
    let order: Vec<usize> = circuit.into_iter().flatten().collect();
    if order.len() != n * k {
        return Err(Error::Sequence("Cayley graph is not connected".into()));
    }
    group.check_eulerian(&order)?;
    Ok(order)
}

/// Orthonormal frame whose three axes make equal angles with +z:
/// e_k·z = 1/√3, so e_1 + e_2 + e_3 = √3 z.
pub fn tilted_frame() -> [[f64; 3]; 3] {
    let h = (2.0f64 / 3.0).sqrt();
    let z = 1.0 / 3f64.sqrt();
    let phi = |k: f64| 2.0 * std::f64::consts::PI * k / 3.0;
    [0.0, 1.0, 2.0].map(|k| [h * phi(k).cos(), h * phi(k).sin(), z])
}
