use crate::error::{invalid, Result};
use crate::grid::{Cube, Grid};
use serde::{Deserialize, Serialize};

fn yes() -> bool {
    true
}

/// Dyadic levels `k_min..=k_max` (cube sides `2^k`), optionally with half-side translates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub k_min: i32,
    pub k_max: i32,
    #[serde(default = "yes")]
    pub translates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyDescriptor {
    Dyadic(FamilySpec),
    Custom(String),
}

/// Finite list of cubes standing in for "all cubes".
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFamily {
    grid: Grid,
    descriptor: FamilyDescriptor,
    cubes: Vec<Cube>,
}

pub const MIN_CELLS_PER_SIDE: usize = 4;

impl CubeFamily {
    pub fn dyadic(grid: Grid, spec: FamilySpec) -> Result<Self> {
        if spec.k_min > spec.k_max {
            return Err(invalid(format!("family levels {}..{} are empty", spec.k_min, spec.k_max)));
        }
        if spec.k_max > grid.box_exponent() {
            return Err(invalid(format!("level {} exceeds the box exponent {}", spec.k_max, grid.box_exponent())));
        }
        let min_level = (MIN_CELLS_PER_SIDE as f64 * grid.h()).log2().ceil() as i32;
        if spec.k_min < min_level {
            return Err(invalid(format!(
                "level {} has fewer than {MIN_CELLS_PER_SIDE} cells per side (smallest allowed {min_level})",
                spec.k_min
            )));
        }
        let m = grid.per_axis();
        let shifts: &[[usize; 2]] = match (grid.dim(), spec.translates) {
            (_, false) => &[[0, 0]],
            (1, true) => &[[0, 0], [1, 0]],
            _ => &[[0, 0], [1, 0], [0, 1], [1, 1]],
        };
        let mut cubes = Vec::new();
        for k in spec.k_min..=spec.k_max {
            let side = (2f64.powi(k) / grid.h()) as usize;
            let half = side / 2;
            for sh in shifts {
                let offs = [sh[0] * half, sh[1] * half];
                let count = |d: usize| if offs[d] == 0 { m / side } else { (m - offs[d]) / side };
                let rows = if grid.dim() == 1 { 1 } else { count(1) };
                for r in 0..rows {
                    for c in 0..count(0) {
                        cubes.push(Cube::new(grid, [offs[0] + c * side, offs[1] + r * side], side)?);
                    }
                }
            }
        }
        Ok(Self { grid, descriptor: FamilyDescriptor::Dyadic(spec), cubes })
    }

    pub fn from_cubes(grid: Grid, cubes: Vec<Cube>, label: impl Into<String>) -> Result<Self> {
        for q in &cubes {
            grid.check_same(&q.grid())?;
        }
        Ok(Self { grid, descriptor: FamilyDescriptor::Custom(label.into()), cubes })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn descriptor(&self) -> &FamilyDescriptor {
        &self.descriptor
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Distinct cube measures in ascending order.
    pub fn measures(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.cubes.iter().map(Cube::measure).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}
