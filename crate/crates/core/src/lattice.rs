//! Discrete velocity models.
//!
//! Direction ordering is frozen: index 0 is the rest direction, then the axis
//! directions, then diagonals (2D) or edges followed by corners (3D). The
//! quantum direction-register mapping in [`crate::circuits`] is keyed on
//! these indices, so reordering them changes every circuit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    D2Q9,
    D3Q27,
}

impl ModelKind {
    pub fn for_dims(dims: usize) -> Option<Self> {
        match dims {
            2 => Some(ModelKind::D2Q9),
            3 => Some(ModelKind::D3Q27),
            _ => None,
        }
    }
}

const D2Q9_VELOCITIES: [[i32; 3]; 9] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [-1, 0, 0],
    [0, -1, 0],
    [1, 1, 0],
    [-1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
];

const D3Q27_VELOCITIES: [[i32; 3]; 27] = [
    [0, 0, 0],
    // faces
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    // edges
    [1, 0, 1],
    [-1, 0, -1],
    [-1, 0, 1],
    [1, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [0, 1, 1],
    [0, -1, -1],
    [0, 1, -1],
    [0, -1, 1],
    // corners
    [1, 1, 1],
    [-1, -1, -1],
    [1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [-1, 1, -1],
    [-1, 1, 1],
    [1, -1, -1],
];

/// A DdQq velocity set with weights and sound speed.
///
/// Velocities are stored as 3-vectors; the z component is zero for 2D models.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    kind: ModelKind,
    dims: usize,
    velocities: Vec<[i32; 3]>,
    weights: Vec<f64>,
    cs2: f64,
    opposite: Vec<usize>,
}

impl LatticeModel {
    pub fn new(kind: ModelKind) -> Self {
        let (dims, velocities): (usize, Vec<[i32; 3]>) = match kind {
            ModelKind::D2Q9 => (2, D2Q9_VELOCITIES.to_vec()),
            ModelKind::D3Q27 => (3, D3Q27_VELOCITIES.to_vec()),
        };
        // Weight depends only on |e|^2: rest, axis, diagonal, corner.
        let table: [f64; 4] = match kind {
            ModelKind::D2Q9 => [4.0 / 9.0, 1.0 / 9.0, 1.0 / 36.0, 0.0],
            ModelKind::D3Q27 => [8.0 / 27.0, 2.0 / 27.0, 1.0 / 54.0, 1.0 / 216.0],
        };
        let weights = velocities
            .iter()
            .map(|e| table[(e[0].abs() + e[1].abs() + e[2].abs()) as usize])
            .collect();
        let opposite = velocities
            .iter()
            .map(|e| {
                velocities
                    .iter()
                    .position(|o| o[0] == -e[0] && o[1] == -e[1] && o[2] == -e[2])
                    .expect("velocity sets are symmetric")
            })
            .collect();
        let model = LatticeModel {
            kind,
            dims,
            velocities,
            weights,
            cs2: 1.0 / 3.0,
            opposite,
        };
        debug_assert!(model.check_invariants().is_ok());
        model
    }

    pub fn d2q9() -> Self {
        Self::new(ModelKind::D2Q9)
    }

    pub fn d3q27() -> Self {
        Self::new(ModelKind::D3Q27)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of discrete directions.
    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    pub fn velocities(&self) -> &[[i32; 3]] {
        &self.velocities
    }

    pub fn velocity(&self, alpha: usize) -> [i32; 3] {
        self.velocities[alpha]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, alpha: usize) -> f64 {
        self.weights[alpha]
    }

    /// Lattice sound speed squared.
    pub fn cs2(&self) -> f64 {
        self.cs2
    }

    /// Direction with the reversed velocity.
    pub fn opposite(&self, alpha: usize) -> usize {
        self.opposite[alpha]
    }

    /// Verifies the moment constraints the weights must satisfy.
    pub fn check_invariants(&self) -> Result<(), String> {
        const TOL: f64 = 1e-14;
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > TOL {
            return Err(format!("weights sum to {sum}"));
        }
        if self.weights.iter().any(|&w| w <= 0.0) {
            return Err("non-positive weight".into());
        }
        for i in 0..3 {
            let first: f64 = self
                .velocities
                .iter()
                .zip(&self.weights)
                .map(|(e, w)| w * e[i] as f64)
                .sum();
            if first.abs() > TOL {
                return Err(format!("first moment along axis {i} is {first}"));
            }
            for j in 0..self.dims {
                if i >= self.dims {
                    continue;
                }
                let second: f64 = self
                    .velocities
                    .iter()
                    .zip(&self.weights)
                    .map(|(e, w)| w * (e[i] * e[j]) as f64)
                    .sum();
                let expected = if i == j { self.cs2 } else { 0.0 };
                if (second - expected).abs() > TOL {
                    return Err(format!("second moment ({i},{j}) is {second}"));
                }
            }
        }
        let rest = self.velocities.iter().filter(|e| **e == [0, 0, 0]).count();
        if rest != 1 || self.velocities[0] != [0, 0, 0] {
            return Err("rest direction must be unique and first".into());
        }
        for (a, ea) in self.velocities.iter().enumerate() {
            if self.velocities[a + 1..].contains(ea) {
                return Err(format!("duplicate velocity {ea:?}"));
            }
        }
        Ok(())
    }
}
