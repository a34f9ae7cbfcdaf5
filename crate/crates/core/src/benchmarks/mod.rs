//! A CEC-2010-style suite of partially separable test functions (F1–F13)
//! with known group structure, generated deterministically from a seed.
//!
//! | id       | structure                      | nonseparable part      | separable part | box          |
//! |----------|--------------------------------|------------------------|----------------|--------------|
//! | F1       | fully separable                | –                      | elliptic       | [-100, 100]  |
//! | F2       | fully separable                | –                      | rastrigin      | [-5, 5]      |
//! | F3       | fully separable                | –                      | ackley         | [-32, 32]    |
//! | F4       | one group, weighted 10⁶        | rotated elliptic       | elliptic       | [-100, 100]  |
//! | F5       | one group, weighted 10⁶        | rotated rastrigin      | rastrigin      | [-5, 5]      |
//! | F6       | one group, weighted 10⁶        | rotated ackley         | ackley         | [-32, 32]    |
//! | F7       | one group, weighted 10⁶        | schwefel 1.2           | sphere         | [-100, 100]  |
//! | F8       | one group, weighted 10⁶        | rosenbrock             | sphere         | [-100, 100]  |
//! | F9       | D/(2m) groups                  | rotated elliptic       | elliptic       | [-100, 100]  |
//! | F10      | D/(2m) groups                  | rotated rastrigin      | rastrigin      | [-5, 5]      |
//! | F11      | D/(2m) groups                  | rotated ackley         | ackley         | [-32, 32]    |
//! | F12      | D/(2m) groups                  | schwefel 1.2           | sphere         | [-100, 100]  |
//! | F13      | D/(2m) groups                  | rosenbrock             | sphere         | [-100, 100]  |
//!
//! Group membership is drawn through a seeded random permutation, so group
//! indices are scattered over the whole vector.

mod base;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use base::{elliptic_weights, BaseFunction};

use crate::error::{CcError, Result};
use crate::problem::{Bounds, GroupStructure, Objective, Problem};

/// Multiplier applied to the single nonseparable group of F4–F8.
pub const SINGLE_GROUP_WEIGHT: f64 = 1e6;

pub const DEFAULT_DIMENSION: usize = 1000;
pub const DEFAULT_GROUP_SIZE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenchmarkId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
    F13,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 13] = [
        BenchmarkId::F1,
        BenchmarkId::F2,
        BenchmarkId::F3,
        BenchmarkId::F4,
        BenchmarkId::F5,
        BenchmarkId::F6,
        BenchmarkId::F7,
        BenchmarkId::F8,
        BenchmarkId::F9,
        BenchmarkId::F10,
        BenchmarkId::F11,
        BenchmarkId::F12,
        BenchmarkId::F13,
    ];

    pub fn number(&self) -> usize {
        *self as usize + 1
    }

    pub fn structure_kind(&self) -> StructureKind {
        match self.number() {
            1..=3 => StructureKind::FullySeparable,
            4..=8 => StructureKind::SingleGroup,
            _ => StructureKind::MultiGroup,
        }
    }

    /// (nonseparable base, separable base). The first is unused for F1–F3.
    pub fn base_functions(&self) -> (BaseFunction, BaseFunction) {
        use BaseFunction::*;
        match self.number() {
            1 | 4 | 9 => (Elliptic, Elliptic),
            2 | 5 | 10 => (Rastrigin, Rastrigin),
            3 | 6 | 11 => (Ackley, Ackley),
            7 | 12 => (Schwefel12, Sphere),
            _ => (Rosenbrock, Sphere),
        }
    }

    /// Only elliptic, rastrigin and ackley groups are rotated.
    pub fn rotated(&self) -> bool {
        matches!(
            self.base_functions().0,
            BaseFunction::Elliptic | BaseFunction::Rastrigin | BaseFunction::Ackley
        )
    }

    pub fn bounds(&self) -> Bounds {
        match self.base_functions().1 {
            BaseFunction::Rastrigin => Bounds::new(-5.0, 5.0),
            BaseFunction::Ackley => Bounds::new(-32.0, 32.0),
            _ => Bounds::new(-100.0, 100.0),
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.number())
    }
}

impl FromStr for BenchmarkId {
    type Err = CcError;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .strip_prefix('F')
            .or_else(|| s.strip_prefix('f'))
            .ok_or_else(|| CcError::UnknownBenchmark(s.to_string()))?;
        let n: usize = digits
            .parse()
            .map_err(|_| CcError::UnknownBenchmark(s.to_string()))?;
        BenchmarkId::ALL
            .get(n.wrapping_sub(1))
            .copied()
            .ok_or_else(|| CcError::UnknownBenchmark(s.to_string()))
    }
}

impl Serialize for BenchmarkId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BenchmarkId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    FullySeparable,
    SingleGroup,
    MultiGroup,
}

/// The reproducible identity of a benchmark instance. Everything else in
/// [`BenchmarkSpec`] is regenerated from these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub id: BenchmarkId,
    pub dimension: usize,
    pub group_size: usize,
    pub seed: u64,
    /// Informational; always equal to the id's box on load.
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

impl BenchmarkConfig {
    pub fn new(id: BenchmarkId, dimension: usize, group_size: usize, seed: u64) -> Self {
        Self {
            id,
            dimension,
            group_size,
            seed,
            bounds: Some(id.bounds()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchmarkConfig = serde_json::from_str(text)?;
        if let Some(b) = cfg.bounds {
            if b != cfg.id.bounds() {
                return Err(CcError::InvalidShape(format!(
                    "bounds [{}, {}] do not match {}",
                    b.lower, b.upper, cfg.id
                )));
            }
        }
        Ok(cfg)
    }
}

/// One nonseparable group of a benchmark instance.
#[derive(Debug, Clone)]
pub struct GroupPart {
    pub indices: Vec<usize>,
    pub base: BaseFunction,
    /// Row-major `m x m` orthogonal matrix, if the group is rotated.
    pub rotation: Option<Vec<f64>>,
    pub weight: f64,
    elliptic: Vec<f64>,
}

impl GroupPart {
    pub fn rotation_matrix(&self) -> Option<DMatrix<f64>> {
        let m = self.indices.len();
        self.rotation
            .as_ref()
            .map(|r| DMatrix::from_row_slice(m, m, r))
    }
}

/// A fully materialized benchmark instance.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub config: BenchmarkConfig,
    pub structure_kind: StructureKind,
    pub bounds: Bounds,
    pub shift: Vec<f64>,
    pub groups: Vec<GroupPart>,
    pub separable: Vec<usize>,
    pub separable_base: BaseFunction,
    separable_elliptic: Vec<f64>,
}

impl BenchmarkSpec {
    pub fn generate(config: &BenchmarkConfig) -> Result<Self> {
        let id = config.id;
        let d = config.dimension;
        let m = config.group_size;
        let kind = id.structure_kind();
        let group_count = match kind {
            StructureKind::FullySeparable => {
                if d == 0 {
                    return Err(CcError::InvalidShape("dimension must be >= 1".into()));
                }
                0
            }
            _ => {
                if m < 2 {
                    return Err(CcError::InvalidShape(format!(
                        "{id} needs group_size >= 2, got {m}"
                    )));
                }
                if d < 2 * m {
                    return Err(CcError::InvalidShape(format!(
                        "{id} needs dimension >= 2*group_size ({}), got {d}",
                        2 * m
                    )));
                }
                if kind == StructureKind::SingleGroup {
                    1
                } else {
                    d / (2 * m)
                }
            }
        };

        let bounds = id.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        // Shift: uniform over the central 80% of the box.
        let inner_lo = bounds.lower + 0.1 * bounds.width();
        let inner_w = 0.8 * bounds.width();
        let shift: Vec<f64> = (0..d)
            .map(|_| inner_lo + inner_w * rng.random::<f64>())
            .collect();

        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);

        let (group_base, separable_base) = id.base_functions();
        let weight = if kind == StructureKind::SingleGroup {
            SINGLE_GROUP_WEIGHT
        } else {
            1.0
        };
        let mut groups = Vec::with_capacity(group_count);
        for k in 0..group_count {
            let mut indices = perm[k * m..(k + 1) * m].to_vec();
            indices.sort_unstable();
            let rotation = id.rotated().then(|| random_rotation(m, &mut rng));
            groups.push(GroupPart {
                indices,
                base: group_base,
                rotation,
                weight,
                elliptic: if group_base == BaseFunction::Elliptic {
                    elliptic_weights(m)
                } else {
                    Vec::new()
                },
            });
        }
        groups.sort_by_key(|g| g.indices[0]);

        let mut separable = perm[group_count * m..].to_vec();
        separable.sort_unstable();
        let separable_elliptic = if separable_base == BaseFunction::Elliptic {
            elliptic_weights(separable.len())
        } else {
            Vec::new()
        };

        Ok(Self {
            config: BenchmarkConfig::new(id, d, m, config.seed),
            structure_kind: kind,
            bounds,
            shift,
            groups,
            separable,
            separable_base,
            separable_elliptic,
        })
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn structure(&self) -> GroupStructure {
        GroupStructure {
            separable: self.separable.clone(),
            groups: self.groups.iter().map(|g| g.indices.clone()).collect(),
        }
    }

    /// Full objective value at `x` (no bounds checking).
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.shift.len());
        let mut total = 0.0;
        let mut z = Vec::new();
        let mut y = Vec::new();
        for g in &self.groups {
            let off = g.base.origin_offset();
            z.clear();
            z.extend(g.indices.iter().map(|&i| x[i] - self.shift[i] + off));
            let arg = match &g.rotation {
                Some(r) => {
                    let m = z.len();
                    y.clear();
                    y.extend(r.chunks_exact(m).map(|row| {
                        row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
                    }));
                    &y
                }
                None => &z,
            };
            total += g.weight * g.base.eval(arg, &g.elliptic);
        }
        if !self.separable.is_empty() {
            let off = self.separable_base.origin_offset();
            z.clear();
            z.extend(self.separable.iter().map(|&i| x[i] - self.shift[i] + off));
            total += self.separable_base.eval(&z, &self.separable_elliptic);
        }
        total
    }
}

/// Printable structure summary of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkInfo {
    pub id: BenchmarkId,
    pub structure: StructureKind,
    pub dimension: usize,
    pub group_size: usize,
    pub seed: u64,
    pub bounds: Bounds,
    pub group_base: Option<BaseFunction>,
    pub separable_base: BaseFunction,
    pub rotated: bool,
    pub group_weight: Option<f64>,
    pub separable_count: usize,
    pub groups: Vec<Vec<usize>>,
}

impl BenchmarkSpec {
    pub fn info(&self) -> BenchmarkInfo {
        let first = self.groups.first();
        BenchmarkInfo {
            id: self.config.id,
            structure: self.structure_kind,
            dimension: self.dimension(),
            group_size: self.config.group_size,
            seed: self.config.seed,
            bounds: self.bounds,
            group_base: first.map(|g| g.base),
            separable_base: self.separable_base,
            rotated: first.is_some_and(|g| g.rotation.is_some()),
            group_weight: first.map(|g| g.weight),
            separable_count: self.separable.len(),
            groups: self.groups.iter().map(|g| g.indices.clone()).collect(),
        }
    }
}

impl Objective for BenchmarkSpec {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.value(x)
    }
}

/// Orthonormalized seeded Gaussian matrix, row-major.
fn random_rotation(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    let q = a.qr().q();
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(q[(i, j)]);
        }
    }
    out
}

/// Build a suite member as a [`Problem`] carrying its true structure.
pub fn build_benchmark(id: BenchmarkId, dimension: usize, group_size: usize, seed: u64) -> Result<Problem> {
    let spec = BenchmarkSpec::generate(&BenchmarkConfig::new(id, dimension, group_size, seed))?;
    Ok(problem_from_spec(spec))
}

pub fn problem_from_spec(spec: BenchmarkSpec) -> Problem {
    let structure = spec.structure();
    let bounds = spec.bounds;
    let d = spec.dimension();
    Problem::uniform(spec.config.id.to_string(), d, bounds, spec).with_structure(structure)
}
