//! Periodic dyadic lattices, Haar functions and martingale differences.

mod function;
mod grid;
mod haar;
mod product;
mod shifts;

use thiserror::Error;

pub use function::{GridFunction, GridFunctionJson};
pub use grid::{shifted_cube, Cube, DiscreteCube, DyadicGrid, GridShape};
pub use haar::{
    average_over, block_diff, cancellative_etas, cell_average, conditional_expectation, haar, haar_support,
    level_averages, level_differences, martingale_diff, telescope,
};
pub use product::{ProductFunction, ProductShape};
pub use shifts::{expectation_over_shifts, shift_sample, ShiftMode, EXACT_SHIFT_CAP_BITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DyadicError {
    #[error("invalid grid: {0}")]
    Shape(String),
    #[error("expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },
    #[error("cube {0:?} does not belong to the grid")]
    BadCube(Cube),
    #[error("invalid eta {0:?}")]
    Eta(Vec<u8>),
    #[error("cube at level {level} needs {needed} finer levels but the grid has depth {depth}")]
    Depth { level: u32, needed: u32, depth: u32 },
    #[error("average over a set of zero measure")]
    NullMeasure,
    #[error("exact shift expectation over 2^{bits} shifts exceeds the cap 2^16; use monte_carlo")]
    TooManyShifts { bits: usize },
    #[error("cannot parse value {0:?}")]
    Parse(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::BaseMeasure;

    fn shape(d: usize, l: u32) -> GridShape {
        GridShape::new(d, l).unwrap()
    }

    #[test]
    fn shift_formula_counts_only_finer_scales() {
        let s = shape(1, 2);
        let i = Cube::new(1, vec![0]);
        let std = DyadicGrid::standard(s);
        assert_eq!(shifted_cube(&i, &std), DiscreteCube { origin: vec![0], side: 2 });

        // ω₁ = 1, ω₂ = 0: only i ≥ 2 enters for ℓ(I) = 1/2
        let g = DyadicGrid::new(s, vec![vec![1], vec![0]]).unwrap();
        assert_eq!(shifted_cube(&i, &g).origin, vec![0]);

        // ω₂ = 1 moves [0,1/2) to [1/4,3/4)
        let g = DyadicGrid::new(s, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(shifted_cube(&i, &g), DiscreteCube { origin: vec![1], side: 2 });

        // finest cells never move: 2^{-i} < 1/4 needs i ≥ 3 > L
        let fine = Cube::new(2, vec![0]);
        assert_eq!(shifted_cube(&fine, &g).origin, vec![0]);
    }

    #[test]
    fn shifted_levels_partition_the_torus() {
        let s = shape(2, 3);
        for code in [0u64, 5, 17, 63] {
            let g = DyadicGrid::from_code(s, code);
            for l in 0..=3 {
                let mut hit = vec![0; s.cells()];
                for q in g.cubes_at(l) {
                    for c in g.cube_cells(&q) {
                        hit[c] += 1;
                        assert_eq!(g.cube_containing(c, l), q);
                    }
                }
                assert!(hit.iter().all(|&h| h == 1));
            }
        }
    }

    #[test]
    fn averages() {
        let s = shape(1, 2);
        let g = DyadicGrid::standard(s);
        let f = GridFunction::new(s, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let leb = BaseMeasure::lebesgue(s);
        assert_eq!(cell_average(&f, &g, &Cube::top(1), &leb).unwrap(), 2.5);
        let s1 = shape(1, 1);
        let f = GridFunction::new(s1, vec![1.0, 3.0]).unwrap();
        let mu = BaseMeasure::from_masses(s1, vec![1.0, 3.0]).unwrap();
        let avg = cell_average(&f, &DyadicGrid::standard(s1), &Cube::top(1), &mu).unwrap();
        assert_eq!(avg, 2.5);
    }

    #[test]
    fn haar_examples() {
        let s = shape(1, 1);
        let g = DyadicGrid::standard(s);
        let h = haar(&g, &Cube::top(1), &[1]).unwrap();
        assert_eq!(h.values(), &[1.0, -1.0]);
        assert_eq!(haar(&g, &Cube::top(1), &[0]).unwrap().values(), &[1.0, 1.0]);
        assert!(haar(&g, &Cube::new(1, vec![1]), &[1]).is_err());

        let s2 = shape(2, 1);
        let g2 = DyadicGrid::standard(s2);
        let h = haar(&g2, &Cube::top(2), &[1, 0]).unwrap();
        // first coordinate is the slow index
        assert_eq!(h.values(), &[1.0, 1.0, -1.0, -1.0]);
        assert!(h.integral().abs() < 1e-15);
        assert!((h.inner(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn martingale_examples() {
        let s = shape(1, 1);
        let g = DyadicGrid::standard(s);
        let f = GridFunction::new(s, vec![1.0, 3.0]).unwrap();
        assert_eq!(martingale_diff(&f, &g, &Cube::top(1)).unwrap().values(), &[-1.0, 1.0]);
        let c = GridFunction::constant(s, 4.0);
        assert!(martingale_diff(&c, &g, &Cube::top(1)).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn haar_expansion_matches_martingale_difference() {
        let s = shape(2, 3);
        let g = DyadicGrid::from_code(s, 0b10_01_11);
        let f = GridFunction::from_fn(s, |c| ((c * 37 % 11) as f64).sin());
        for q in g.all_cubes().filter(|q| q.level < 3) {
            let delta = martingale_diff(&f, &g, &q).unwrap();
            let mut sum = GridFunction::zeros(s);
            for eta in cancellative_etas(2) {
                let h = haar(&g, &q, &eta).unwrap();
                sum.axpy(f.inner(&h), &h);
            }
            assert!(delta.max_abs_diff(&sum) < 1e-12);
            assert_eq!(block_diff(&f, &g, &q, 0).unwrap(), delta);
        }
    }

    #[test]
    fn expectation_two_shifts() {
        let s = shape(1, 1);
        let f = |g: &DyadicGrid| haar(g, &Cube::top(1), &[1]).unwrap();
        let e = expectation_over_shifts(s, ShiftMode::Exact, f).unwrap();
        let a = f(&DyadicGrid::from_code(s, 0));
        let b = f(&DyadicGrid::from_code(s, 1));
        assert_eq!(e, a.add(&b).scale(0.5));
        assert_eq!(a.values(), &[1.0, -1.0]);
        assert_eq!(b.values(), &[-1.0, 1.0]);

        let c = |_: &DyadicGrid| GridFunction::constant(s, 3.0);
        assert_eq!(expectation_over_shifts(s, ShiftMode::Exact, c).unwrap().values(), &[3.0, 3.0]);
        let mc = ShiftMode::MonteCarlo { samples: 7, seed: 9 };
        assert_eq!(expectation_over_shifts(s, mc, c).unwrap().values(), &[3.0, 3.0]);

        let big = shape(2, 9);
        let err = expectation_over_shifts(big, ShiftMode::Exact, c).unwrap_err();
        assert_eq!(err, DyadicError::TooManyShifts { bits: 18 });
    }

    #[test]
    fn json_round_trip() {
        let s = shape(1, 2);
        let g = DyadicGrid::new(s, vec![vec![1], vec![0]]).unwrap();
        let f = GridFunction::new(s, vec![0.1, 1.0 / 3.0, -2.5, 1e-300]).unwrap();
        let j = serde_json::to_string(&f.to_json(Some(&g))).unwrap();
        let back: GridFunctionJson = serde_json::from_str(&j).unwrap();
        let (f2, g2) = GridFunction::from_json(&back).unwrap();
        assert_eq!(f2, f);
        assert_eq!(g2, g);
    }

    #[test]
    fn shifted_lattices_nest_geometrically() {
        let s = shape(1, 3);
        for code in 0..8 {
            let grid = DyadicGrid::from_code(s, code);
            for cube in grid.all_cubes().filter(|c| c.level < 3) {
                let mut cells: Vec<usize> = grid.children(&cube).iter().flat_map(|j| grid.cube_cells(j)).collect();
                cells.sort_unstable();
                let mut own = grid.cube_cells(&cube);
                own.sort_unstable();
                assert_eq!(cells, own, "omega code {code}, cube {cube:?}");
                for j in grid.children(&cube) {
                    assert_eq!(grid.parent(&j), Some(cube.clone()));
                    assert!(grid.contains(&cube, &j));
                }
            }
        }
        // ω₂ = 1 on L = 2: [0,1/4) is a child of the shifted [3/4,5/4), not of [1/4,3/4)
        let g = DyadicGrid::new(shape(1, 2), vec![vec![0], vec![1]]).unwrap();
        assert_eq!(g.parent(&Cube::new(2, vec![0])), Some(Cube::new(1, vec![1])));
    }
}
