use super::field::GridField;

/// A grid point strictly above all of its 3^dim − 1 periodic neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMaximum {
    /// Flat row-major index into the grid.
    pub index: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Maxima {
    pub maxima: Vec<LocalMaximum>,
    /// Points that were not below any neighbour but equal to at least one.
    pub ties: usize,
}

/// Discrete local maxima of a periodic grid field. Tied points are
/// excluded and counted.
pub fn extract_local_maxima(field: &GridField) -> Maxima {
    let grid = field.grid;
    let m = grid.points_per_side();
    let dim = grid.dim();
    let values = &field.values;
    let offsets = neighbour_offsets(dim);
    let mut out = Maxima::default();
    let mut coords = [0usize; 3];
    for (index, &v) in values.iter().enumerate() {
        let mut rest = index;
        for c in coords[..dim].iter_mut().rev() {
            *c = rest % m;
            rest /= m;
        }
        let mut tied = false;
        let mut below = false;
        for offset in &offsets {
            let mut neighbour = 0;
            for axis in 0..dim {
                let c = (coords[axis] as isize + offset[axis]).rem_euclid(m as isize) as usize;
                neighbour = neighbour * m + c;
            }
            let w = values[neighbour];
            if w > v {
                below = true;
                break;
            }
            if w == v {
                tied = true;
            }
        }
        if below {
            continue;
        }
        if tied {
            out.ties += 1;
        } else {
            out.maxima.push(LocalMaximum { index, height: v });
        }
    }
    out
}

fn neighbour_offsets(dim: usize) -> Vec<[isize; 3]> {
    let mut offsets = Vec::new();
    let span = 3usize.pow(dim as u32);
    for code in 0..span {
        let mut o = [0isize; 3];
        let mut rest = code;
        for axis in o[..dim].iter_mut() {
            *axis = (rest % 3) as isize - 1;
            rest /= 3;
        }
        if o != [0, 0, 0] {
            offsets.push(o);
        }
    }
    offsets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::field::GridConfig;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_has_no_maxima() {
        for dim in 1..=3 {
            let grid = GridConfig::torus(dim, 4, 1.0).unwrap();
            let field = GridField::new(grid, vec![0.3; grid.len()]).unwrap();
            let found = extract_local_maxima(&field);
            assert!(found.maxima.is_empty());
            assert_eq!(found.ties, grid.len());
        }
    }

    #[test]
    fn periodic_sequence() {
        let grid = GridConfig::torus(1, 6, 6.0).unwrap();
        let field = GridField::new(grid, vec![0.0, 1.0, 0.0, 2.0, 0.0, -1.0]).unwrap();
        let found = extract_local_maxima(&field);
        let idx: Vec<usize> = found.maxima.iter().map(|m| m.index).collect();
        assert_eq!(idx, vec![1, 3]);
        assert_eq!(found.ties, 0);
        // Wraparound: the first point neighbours the last.
        let field = GridField::new(grid, vec![3.0, 1.0, 0.0, 1.0, 0.0, 2.0]).unwrap();
        let idx: Vec<usize> = extract_local_maxima(&field).maxima.iter().map(|m| m.index).collect();
        assert_eq!(idx, vec![0, 3]);
    }

    #[test]
    fn single_bump_on_torus() {
        for dim in 1..=3 {
            let m = 12;
            let grid = GridConfig::torus(dim, m, 2.0 * PI).unwrap();
            let peak = [5usize, 7, 2];
            let values = (0..grid.len())
                .map(|i| {
                    let mut rest = i;
                    let mut sum = 0.0;
                    for axis in (0..dim).rev() {
                        let c = rest % m;
                        rest /= m;
                        sum += ((c as f64 - peak[axis] as f64) * 2.0 * PI / m as f64).cos();
                    }
                    sum
                })
                .collect();
            let found = extract_local_maxima(&GridField::new(grid, values).unwrap());
            assert_eq!(found.maxima.len(), 1, "dim {dim}");
            let expected = peak[..dim].iter().fold(0, |acc, &c| acc * m + c);
            assert_eq!(found.maxima[0].index, expected);
            assert!((found.maxima[0].height - dim as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_neighbours_count() {
        let grid = GridConfig::torus(2, 3, 3.0).unwrap();
        // The centre beats its axis neighbours but not the corner.
        let field = GridField::new(grid, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let found = extract_local_maxima(&field);
        assert_eq!(found.maxima.len(), 1);
        assert_eq!(found.maxima[0].index, 8);
    }
}
