//! Dictionaries of unit-norm atoms on `[0, 1]`, their design matrices, and
//! group partitions of the coefficient index set.

mod atom;
pub mod daubechies;
mod design;
mod grid;
mod partition;
mod spec;

use std::ops::Range;
use std::sync::Arc;

pub use atom::{haar_mother, histogram_bin, Atom, AtomKind, Sampled};
pub use design::DesignMatrix;
pub use grid::{DesignGrid, GridConvention};
pub use partition::GroupPartition;
pub use spec::{DictionarySpec, SystemSpec};

use crate::error::{Error, Result};

/// A named run of consecutive atoms coming from one system (one basis).
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub name: String,
    pub range: Range<usize>,
}

/// An ordered, possibly redundant, family of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Vec<Atom>,
    systems: Vec<System>,
}

impl Dictionary {
    fn single(name: impl Into<String>, atoms: Vec<Atom>) -> Self {
        let range = 0..atoms.len();
        Self {
            atoms,
            systems: vec![System {
                name: name.into(),
                range,
            }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn systems(&self) -> &[System] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `A_ij = phi_j(x_i)`; atoms vanishing on every design point are rejected.
    pub fn evaluate(&self, grid: &DesignGrid) -> Result<DesignMatrix> {
        DesignMatrix::from_atoms(&self.atoms, grid)
    }

    /// `log f(x) = sum_j beta_j phi_j(x)` at each query point.
    pub fn combine(&self, beta: &[f64], x: f64) -> f64 {
        self.atoms
            .iter()
            .zip(beta)
            .filter(|(_, b)| **b != 0.0)
            .map(|(a, b)| b * a.eval(x))
            .sum()
    }
}

/// Haar scaling function plus `psi_{j,k}` for `0 <= j < max_level`.
pub fn build_haar(grid: &DesignGrid, max_level: u32) -> Result<Dictionary> {
    let n = grid.len();
    if max_level >= usize::BITS - 1 || (1usize << max_level) > n {
        return Err(Error::Resolution(format!(
            "Haar depth {max_level} needs 2^{max_level} <= n = {n}"
        )));
    }
    let mut atoms = vec![Atom::new(AtomKind::HaarScaling)];
    for level in 0..max_level {
        for shift in 0..(1u32 << level) {
            atoms.push(Atom::new(AtomKind::Haar { level, shift }));
        }
    }
    Ok(Dictionary::single("haar", atoms))
}

/// Periodized Daubechies atoms, sampled on the grid through the inverse
/// transform of unit coefficient vectors, scaled so `sum_i phi^2(x_i) = n`.
///
/// The grid is treated as regular: sample `i` is the `i`-th grid point.
pub fn build_daubechies(grid: &DesignGrid, moments: usize, max_level: u32) -> Result<Dictionary> {
    let n = grid.len();
    if !n.is_power_of_two() {
        return Err(Error::Shape(format!(
            "Daubechies atoms need n a power of two, got {n}"
        )));
    }
    if daubechies::scaling_filter(moments).is_none() {
        return Err(Error::Config(format!(
            "vanishing moments must be in 1..=10, got {moments}"
        )));
    }
    let levels = n.trailing_zeros();
    if max_level > levels {
        return Err(Error::Resolution(format!(
            "Daubechies depth {max_level} needs 2^{max_level} <= n = {n}"
        )));
    }
    let points: Arc<[f64]> = Arc::from(grid.points().to_vec());
    let scale = (n as f64).sqrt();
    let make = |level: Option<u32>, shift: u32| {
        let values = daubechies::synthesize_unit(moments, levels, level, shift as usize)
            .into_iter()
            .map(|v| v * scale)
            .collect();
        let sampled = Sampled {
            points: Arc::clone(&points),
            values,
        };
        Atom::new(AtomKind::Daubechies {
            moments,
            level,
            shift,
            sampled,
        })
    };
    let mut atoms = vec![make(None, 0)];
    for level in 0..max_level {
        for shift in 0..(1u32 << level) {
            atoms.push(make(Some(level), shift));
        }
    }
    Ok(Dictionary::single(format!("db{moments}"), atoms))
}

/// `1, sqrt(2) cos(2 pi m x), sqrt(2) sin(2 pi m x)` for `m = 1..=(n_atoms-1)/2`.
pub fn build_fourier(grid: &DesignGrid, n_atoms: usize) -> Result<Dictionary> {
    if n_atoms.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "Fourier atom count must be odd, got {n_atoms}"
        )));
    }
    if n_atoms > grid.len() {
        return Err(Error::Resolution(format!(
            "{n_atoms} Fourier atoms exceed n = {}",
            grid.len()
        )));
    }
    let mut atoms = vec![Atom::new(AtomKind::Constant)];
    for freq in 1..=((n_atoms - 1) / 2) as u32 {
        atoms.push(Atom::new(AtomKind::Cosine { freq }));
        atoms.push(Atom::new(AtomKind::Sine { freq }));
    }
    Ok(Dictionary::single("fourier", atoms))
}

/// Regular histogram `delta^{-1/2} 1_(delta (l-1), delta l]`, `l = 1..=1/delta`.
pub fn build_histogram(grid: &DesignGrid, delta: f64) -> Result<Dictionary> {
    let inv = 1.0 / delta;
    if !(delta > 0.0 && delta <= 1.0) || (inv - inv.round()).abs() > 1e-9 * inv {
        return Err(Error::Config(format!(
            "1/delta must be a positive integer, got delta = {delta}"
        )));
    }
    let bins = inv.round() as u32;
    let mut occupied = vec![false; bins as usize];
    for &x in grid.points() {
        occupied[(histogram_bin(x, delta).min(bins) - 1) as usize] = true;
    }
    if let Some(empty) = occupied.iter().position(|o| !o) {
        return Err(Error::DegenerateAtom {
            atom: format!("hist({})", empty + 1),
        });
    }
    let atoms = (1..=bins)
        .map(|bin| Atom::new(AtomKind::Histogram { bin, delta }))
        .collect();
    Ok(Dictionary::single("hist", atoms))
}

/// The single constant atom.
pub fn build_constant() -> Dictionary {
    Dictionary::single("const", vec![Atom::new(AtomKind::Constant)])
}

/// Concatenates systems in order; `p` is the sum of the sizes.
pub fn concat(dicts: impl IntoIterator<Item = Dictionary>) -> Result<Dictionary> {
    let mut atoms = Vec::new();
    let mut systems = Vec::new();
    for dict in dicts {
        let offset = atoms.len();
        systems.extend(dict.systems.into_iter().map(|s| System {
            name: s.name,
            range: (s.range.start + offset)..(s.range.end + offset),
        }));
        atoms.extend(dict.atoms);
    }
    if atoms.is_empty() {
        return Err(Error::Config(
            "cannot concatenate an empty list of dictionaries".into(),
        ));
    }
    Ok(Dictionary { atoms, systems })
}

/// Groups coefficients into consecutive runs of `group_size` inside each
/// system and wavelet scale. A trailing short run forms its own group.
pub fn group_by_scale(dict: &Dictionary, group_size: usize) -> Result<GroupPartition> {
    if group_size == 0 {
        return Err(Error::Config("group size must be at least 1".into()));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for system in &dict.systems {
        let mut start = system.range.start;
        while start < system.range.end {
            let class = dict.atoms[start].group_class();
            let mut end = start;
            while end < system.range.end && dict.atoms[end].group_class() == class {
                end += 1;
            }
            let block: Vec<usize> = (start..end).collect();
            groups.extend(block.chunks(group_size).map(<[usize]>::to_vec));
            start = end;
        }
    }
    GroupPartition::new(groups, dict.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn haar_counts_and_resolution() {
        let grid = DesignGrid::midpoints(8).unwrap();
        assert_eq!(build_haar(&grid, 3).unwrap().len(), 8);
        assert_eq!(build_haar(&grid, 0).unwrap().len(), 1);
        assert!(matches!(build_haar(&grid, 4), Err(Error::Resolution(_))));
    }

    #[test]
    fn haar_column_on_midpoints() {
        let grid = DesignGrid::midpoints(4).unwrap();
        let a = build_haar(&grid, 2).unwrap().evaluate(&grid).unwrap();
        assert_eq!(a.column(0).to_vec(), vec![1.0; 4]);
        assert_eq!(a.column(1).to_vec(), vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(a.column(2).to_vec(), vec![SQRT_2, -SQRT_2, 0.0, 0.0]);
    }

    #[test]
    fn histogram_columns() {
        let grid = DesignGrid::midpoints(4).unwrap();
        let a = build_histogram(&grid, 0.5)
            .unwrap()
            .evaluate(&grid)
            .unwrap();
        assert_eq!(a.ncols(), 2);
        assert_eq!(a.column(0).to_vec(), vec![SQRT_2, SQRT_2, 0.0, 0.0]);
        assert_eq!(a.column(1).to_vec(), vec![0.0, 0.0, SQRT_2, SQRT_2]);
        let one = build_histogram(&grid, 1.0)
            .unwrap()
            .evaluate(&grid)
            .unwrap();
        assert_eq!(one.column(0).to_vec(), vec![1.0; 4]);
    }

    #[test]
    fn histogram_rejects_empty_bins_and_bad_delta() {
        let grid = DesignGrid::midpoints(4).unwrap();
        assert!(matches!(
            build_histogram(&grid, 0.125),
            Err(Error::DegenerateAtom { .. })
        ));
        assert!(matches!(build_histogram(&grid, 0.3), Err(Error::Config(_))));
        assert!(matches!(build_histogram(&grid, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn fourier_preconditions() {
        let grid = DesignGrid::midpoints(8).unwrap();
        assert_eq!(build_fourier(&grid, 7).unwrap().len(), 7);
        assert!(build_fourier(&grid, 6).is_err());
        assert!(build_fourier(&grid, 9).is_err());
    }

    #[test]
    fn daubechies_one_is_haar() {
        let grid = DesignGrid::midpoints(16).unwrap();
        let haar = build_haar(&grid, 4).unwrap().evaluate(&grid).unwrap();
        let db1 = build_daubechies(&grid, 1, 4)
            .unwrap()
            .evaluate(&grid)
            .unwrap();
        for j in 0..16 {
            let (h, d) = (haar.column(j), db1.column(j));
            let same = h.iter().zip(d.iter()).all(|(x, y)| (x - y).abs() < 1e-12);
            let flipped = h.iter().zip(d.iter()).all(|(x, y)| (x + y).abs() < 1e-12);
            assert!(same || flipped, "column {j}");
        }
    }

    #[test]
    fn daubechies_shape_errors() {
        let grid = DesignGrid::midpoints(12).unwrap();
        assert!(matches!(
            build_daubechies(&grid, 2, 2),
            Err(Error::Shape(_))
        ));
        let grid = DesignGrid::midpoints(8).unwrap();
        assert_eq!(build_daubechies(&grid, 4, 3).unwrap().len(), 8);
        assert!(build_daubechies(&grid, 11, 3).is_err());
        assert!(build_daubechies(&grid, 2, 4).is_err());
    }

    #[test]
    fn concat_preserves_systems() {
        let grid = DesignGrid::midpoints(1024).unwrap();
        let d = concat([
            build_haar(&grid, 10).unwrap(),
            build_fourier(&grid, 1023).unwrap(),
            build_constant(),
        ])
        .unwrap();
        assert_eq!(d.len(), 2048);
        assert_eq!(d.systems().len(), 3);
        assert_eq!(d.systems()[1].range, 1024..2047);
        let single = concat([build_haar(&grid, 3).unwrap()]).unwrap();
        assert_eq!(single, build_haar(&grid, 3).unwrap());
        assert!(concat(Vec::new()).is_err());
    }

    #[test]
    fn grouping_by_scale() {
        let grid = DesignGrid::midpoints(8).unwrap();
        let haar = build_haar(&grid, 3).unwrap();
        let singles = group_by_scale(&haar, 1).unwrap();
        assert_eq!(singles.len(), 8);
        let pairs = group_by_scale(&haar, 2).unwrap();
        // scaling | level 0 | level 1 | level 2 split in two
        let got: Vec<Vec<usize>> = pairs.groups().to_vec();
        assert_eq!(
            got,
            vec![vec![0], vec![1], vec![2, 3], vec![4, 5], vec![6, 7]]
        );
        let fours = group_by_scale(&haar, 4).unwrap();
        assert_eq!(fours.groups()[1], vec![1]);
        assert!(group_by_scale(&haar, 0).is_err());
    }

    #[test]
    fn groups_never_straddle_systems() {
        let grid = DesignGrid::midpoints(8).unwrap();
        let d = concat([
            build_fourier(&grid, 5).unwrap(),
            build_haar(&grid, 2).unwrap(),
        ])
        .unwrap();
        let part = group_by_scale(&d, 4).unwrap();
        assert_eq!(part.groups()[0], vec![0, 1, 2, 3]);
        assert_eq!(part.groups()[1], vec![4]);
        assert_eq!(part.groups()[2], vec![5]);
    }
}
