use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::mollifier::Mollifier;
use crate::error::Result;
use crate::lattice::Lattice;
use crate::output::{float, CsvWriter};

pub const TABLE_STATS_SCHEMA: &str = "qboltz.table_stats.v1";

/// Weights below this fraction of the largest weight are not stored.
const DROP_THRESHOLD: f64 = 1e-14;

/// `(k₂, k₃, k₄, w, K)` of one quadruple before packing.
type Row = (u32, u32, u32, f64, f64);
/// Borrowed column slices of one `k₁` block.
pub(crate) type Columns<'a> = (&'a [u32], &'a [u32], &'a [u32], &'a [f64], &'a [f64]);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelMode {
    /// `|v̂(k₁−k₄) − v̂(k₁−k₃)|²`
    #[default]
    Plain,
    /// `¼|v̂(k₁−k₄) − v̂(k₂−k₄) − v̂(k₁−k₃) + v̂(k₂−k₃)|²`
    Symmetrized,
}

impl FromStr for KernelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Self::Plain),
            "symmetrized" => Ok(Self::Symmetrized),
            other => Err(format!("unknown kernel mode `{other}` (plain | symmetrized)")),
        }
    }
}

/// Scattering kernel of a momentum-conserving quadruple.
pub fn kernel_value(lattice: &Lattice, k1: usize, k2: usize, k3: usize, k4: usize, mode: KernelMode) -> f64 {
    let g = &lattice.grid;
    let v = |k| lattice.potential.fourier(k);
    match mode {
        KernelMode::Plain => (v(g.sub(k1, k4)) - v(g.sub(k1, k3))).powi(2),
        KernelMode::Symmetrized => {
            0.25 * (v(g.sub(k1, k4)) - v(g.sub(k2, k4)) - v(g.sub(k1, k3)) + v(g.sub(k2, k3))).powi(2)
        }
    }
}

/// For every total momentum `P`, the modes `k` sorted by the pair energy
/// `e(k) + e(P − k)`.
struct PairShells {
    modes: usize,
    energy: Vec<f64>,
    mode: Vec<usize>,
}

impl PairShells {
    fn new(lattice: &Lattice) -> Self {
        let m = lattice.modes();
        let shells: Vec<Vec<(f64, usize)>> = (0..m)
            .into_par_iter()
            .map(|total| {
                let mut shell: Vec<(f64, usize)> = (0..m)
                    .map(|k| (lattice.energy(k) + lattice.energy(lattice.grid.sub(total, k)), k))
                    .collect();
                shell.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                shell
            })
            .collect();
        let (energy, mode) = shells.into_iter().flatten().unzip();
        Self { modes: m, energy, mode }
    }

    fn within(&self, total: usize, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        let span = total * self.modes..(total + 1) * self.modes;
        let energy = &self.energy[span.clone()];
        let start = energy.partition_point(|&e| e < lo);
        let end = energy.partition_point(|&e| e <= hi);
        self.mode[span][start..end].iter().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadruple {
    pub k: [usize; 4],
    pub weight: f64,
    pub kernel: f64,
}

/// Momentum-conserving quadruples grouped by `k₁`, with mollified energy
/// weights and an aligned kernel column.
#[derive(Clone, Debug)]
pub struct QuadrupleTable {
    modes: usize,
    mollifier: Mollifier,
    mode: KernelMode,
    offsets: Vec<usize>,
    k2: Vec<u32>,
    k3: Vec<u32>,
    k4: Vec<u32>,
    weight: Vec<f64>,
    kernel: Vec<f64>,
}

impl QuadrupleTable {
    pub fn build(lattice: &Lattice, mollifier: Mollifier, mode: KernelMode) -> Self {
        let m = lattice.modes();
        let peak = mollifier.value(0.0);
        let keep = |k1: usize, k2: usize, k3: usize, k4: usize| {
            let w = mollifier.value(lattice.delta_e(k1, k2, k3, k4));
            (w >= DROP_THRESHOLD * peak && w != 0.0).then(|| {
                (
                    k2 as u32,
                    k3 as u32,
                    k4 as u32,
                    w,
                    kernel_value(lattice, k1, k2, k3, k4, mode),
                )
            })
        };
        let rows: Vec<Vec<Row>> = match mollifier.support_radius(DROP_THRESHOLD) {
            Some(radius) => {
                let shells = PairShells::new(lattice);
                let slack = radius * (1.0 + 1e-9) + 1e-12;
                (0..m)
                    .into_par_iter()
                    .map(|k1| {
                        let mut row = Vec::new();
                        let mut k3s = Vec::new();
                        for k2 in 0..m {
                            let total = lattice.grid.add(k1, k2);
                            let e12 = lattice.energy(k1) + lattice.energy(k2);
                            k3s.clear();
                            k3s.extend(shells.within(total, e12 - slack, e12 + slack));
                            k3s.sort_unstable();
                            for &k3 in &k3s {
                                let k4 = lattice.grid.close_quadruple(k1, k2, k3);
                                row.extend(keep(k1, k2, k3, k4));
                            }
                        }
                        row
                    })
                    .collect()
            }
            None => (0..m)
                .into_par_iter()
                .map(|k1| {
                    let mut row = Vec::new();
                    for k2 in 0..m {
                        for k3 in 0..m {
                            let k4 = lattice.grid.close_quadruple(k1, k2, k3);
                            row.extend(keep(k1, k2, k3, k4));
                        }
                    }
                    row
                })
                .collect(),
        };
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut table = Self {
            modes: m,
            mollifier,
            mode,
            offsets: Vec::with_capacity(m + 1),
            k2: Vec::with_capacity(total),
            k3: Vec::with_capacity(total),
            k4: Vec::with_capacity(total),
            weight: Vec::with_capacity(total),
            kernel: Vec::with_capacity(total),
        };
        table.offsets.push(0);
        for row in rows {
            for (k2, k3, k4, w, kernel) in row {
                table.k2.push(k2);
                table.k3.push(k3);
                table.k4.push(k4);
                table.weight.push(w);
                table.kernel.push(kernel);
            }
            table.offsets.push(table.k2.len());
        }
        table
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mollifier(&self) -> Mollifier {
        self.mollifier
    }

    pub fn kernel_mode(&self) -> KernelMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn count(&self, k1: usize) -> usize {
        self.offsets[k1 + 1] - self.offsets[k1]
    }

    /// `Σ w` over the quadruples of `k₁`.
    pub fn weight_mass(&self, k1: usize) -> f64 {
        self.weight[self.offsets[k1]..self.offsets[k1 + 1]].iter().sum()
    }

    pub fn row(&self, k1: usize) -> impl Iterator<Item = Quadruple> + '_ {
        (self.offsets[k1]..self.offsets[k1 + 1]).map(move |i| Quadruple {
            k: [k1, self.k2[i] as usize, self.k3[i] as usize, self.k4[i] as usize],
            weight: self.weight[i],
            kernel: self.kernel[i],
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Quadruple> + '_ {
        (0..self.modes).flat_map(move |k1| self.row(k1))
    }

    /// The stored entry for `(k₁, k₂, k₃)`, if any.
    pub fn lookup(&self, k1: usize, k2: usize, k3: usize) -> Option<Quadruple> {
        let range = self.offsets[k1]..self.offsets[k1 + 1];
        let key = (k2 as u32, k3 as u32);
        let pos = range.start
            + self.k2[range.clone()]
                .iter()
                .zip(&self.k3[range.clone()])
                .position(|(&a, &b)| (a, b) == key)?;
        Some(Quadruple {
            k: [k1, k2, k3, self.k4[pos] as usize],
            weight: self.weight[pos],
            kernel: self.kernel[pos],
        })
    }

    /// Column views for the hot loop: `(k₂, k₃, k₄, w·K)`.
    pub(crate) fn columns(&self, k1: usize) -> Columns<'_> {
        let r = self.offsets[k1]..self.offsets[k1 + 1];
        (
            &self.k2[r.clone()],
            &self.k3[r.clone()],
            &self.k4[r.clone()],
            &self.weight[r.clone()],
            &self.kernel[r],
        )
    }

    /// Per-`k₁` quadruple counts and weight mass.
    pub fn write_stats_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = CsvWriter::create(path, TABLE_STATS_SCHEMA, &["k1", "count", "weight_mass"])?;
        for k1 in 0..self.modes {
            out.row(&[k1.to_string(), self.count(k1).to_string(), float(self.weight_mass(k1))])?;
        }
        out.finish().map(|_| ())
    }
}
