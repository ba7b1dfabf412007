//! Incidence, admittance and Laplacian matrix assembly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{BranchKind, GridError, GridGraph};

/// N×N complex bus admittance matrix in siemens, `Y = Aᵀ·diag(y_pr)·A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub entries: DMatrix<Complex64>,
}

impl AdmittanceMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdmittanceOptions {
    /// Series impedance substituted for switches and ideal transformers
    /// whose own parameters give zero impedance.
    pub surrogate_impedance_ohm: Complex64,
    /// Include branches whose status is `open`.
    pub include_open: bool,
}

impl Default for AdmittanceOptions {
    fn default() -> Self {
        AdmittanceOptions {
            surrogate_impedance_ohm: Complex64::new(1e-4, 1e-4),
            include_open: false,
        }
    }
}

/// Signed line-node incidence matrix A (in-service branches × buses).
///
/// Row `l` has +1 at the lower-id endpoint of branch `l` and −1 at the
/// other; rows follow branch storage order.
pub fn incidence_matrix(g: &GridGraph) -> DMatrix<i32> {
    let rows: Vec<(usize, usize)> = g
        .in_service_branches()
        .map(|(_, br)| {
            let a = g.bus_index(br.from).unwrap();
            let b = g.bus_index(br.to).unwrap();
            (a, b)
        })
        .collect();
    let mut m = DMatrix::zeros(rows.len(), g.n_buses());
    for (l, (a, b)) in rows.into_iter().enumerate() {
        let (plus, minus) = if g.bus_id(a) < g.bus_id(b) { (a, b) } else { (b, a) };
        m[(l, plus)] = 1;
        m[(l, minus)] = -1;
    }
    m
}

/// Per-branch series admittances `y_pr(l) = 1/z_pr(l)` for the branches
/// selected by `opts`, aligned with [`incidence_matrix`] rows.
///
/// Switches and transformers with zero series impedance receive the
/// configured surrogate; a zero-impedance line is an error.
pub fn branch_admittances(
    g: &GridGraph,
    opts: &AdmittanceOptions,
) -> Result<Vec<Complex64>, GridError> {
    let mut out = Vec::new();
    for (index, br) in g.branches().iter().enumerate() {
        if !br.is_in_service() && !opts.include_open {
            continue;
        }
        let mut z = br.series_impedance_ohm();
        if z.norm() == 0.0 {
            match br.kind {
                BranchKind::Switch | BranchKind::Transformer => {
                    z = opts.surrogate_impedance_ohm;
                }
                BranchKind::Line => {
                    return Err(GridError::ZeroImpedance {
                        index,
                        from: br.from,
                        to: br.to,
                    })
                }
            }
            if z.norm() == 0.0 {
                return Err(GridError::ZeroImpedance {
                    index,
                    from: br.from,
                    to: br.to,
                });
            }
        }
        out.push(z.inv());
    }
    Ok(out)
}

pub fn admittance_matrix(g: &GridGraph) -> Result<AdmittanceMatrix, GridError> {
    admittance_matrix_with(g, &AdmittanceOptions::default())
}

/// Assembles Y by stamping each branch admittance onto its endpoints.
/// Parallel branches sum naturally; the result equals the explicit
/// `Aᵀ·diag(y_pr)·A` product entry for entry.
pub fn admittance_matrix_with(
    g: &GridGraph,
    opts: &AdmittanceOptions,
) -> Result<AdmittanceMatrix, GridError> {
    let n = g.n_buses();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let admittances = branch_admittances(g, opts)?;
    let mut row = 0;
    for br in g.branches() {
        if !br.is_in_service() && !opts.include_open {
            continue;
        }
        let ypr = admittances[row];
        row += 1;
        let a = g.bus_index(br.from).unwrap();
        let b = g.bus_index(br.to).unwrap();
        y[(a, a)] += ypr;
        y[(b, b)] += ypr;
        y[(a, b)] -= ypr;
        y[(b, a)] -= ypr;
    }
    Ok(AdmittanceMatrix { entries: y })
}

/// Graph Laplacian of the simplified graph: diagonal = degree,
/// off-diagonal −1 for adjacent pairs.
pub fn laplacian(g: &GridGraph) -> DMatrix<f64> {
    let n = g.n_buses();
    let mut l = DMatrix::zeros(n, n);
    for (a, b) in g.simplified_edges() {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
    }
    l
}

/// 0/1 adjacency matrix of the simplified graph.
pub fn simple_adjacency_matrix(g: &GridGraph) -> DMatrix<f64> {
    let n = g.n_buses();
    let mut a = DMatrix::zeros(n, n);
    for (i, j) in g.simplified_edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Branch, BranchStatus, Bus};
    use approx::assert_abs_diff_eq;

    fn path3() -> GridGraph {
        GridGraph::from_branches(vec![
            Branch::line(1, 2, 1000.0, 0.0, 0.1),
            Branch::line(2, 3, 1000.0, 0.0, 0.1),
        ])
        .unwrap()
    }

    #[test]
    fn single_branch_incidence() {
        let g = GridGraph::from_branches(vec![Branch::line(1, 2, 100.0, 0.2, 0.35)]).unwrap();
        let a = incidence_matrix(&g);
        assert_eq!(a, DMatrix::from_row_slice(1, 2, &[1, -1]));
    }

    #[test]
    fn path_incidence_and_row_sums() {
        let a = incidence_matrix(&path3());
        assert_eq!(a, DMatrix::from_row_slice(2, 3, &[1, -1, 0, 0, 1, -1]));
        for l in 0..a.nrows() {
            assert_eq!(a.row(l).sum(), 0);
        }
    }

    #[test]
    fn single_branch_admittance() {
        // z = j0.1 ohm over the whole branch
        let g = GridGraph::from_branches(vec![Branch::line(1, 2, 1000.0, 0.0, 0.1)]).unwrap();
        let y = admittance_matrix(&g).unwrap().entries;
        let y12 = Complex64::new(0.0, 0.1).inv();
        assert_abs_diff_eq!(y[(0, 0)].re, y12.re, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 0)].im, y12.im, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)].re, -y12.re, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)].im, -y12.im, epsilon = 1e-12);
    }

    #[test]
    fn admittance_matches_incidence_product() {
        // Three buses, parallel branches between 1 and 2: the oracle is the
        // explicit Aᵀ·diag(y_pr)·A product.
        let g = GridGraph::from_branches(vec![
            Branch::line(1, 2, 1000.0, 0.1, 0.2),
            Branch::line(1, 2, 500.0, 0.3, 0.1),
            Branch::line(2, 3, 2000.0, 0.2, 0.4),
        ])
        .unwrap();
        let y = admittance_matrix(&g).unwrap().entries;

        let a_int = incidence_matrix(&g);
        let a = a_int.map(|v| Complex64::new(v as f64, 0.0));
        let ypr = branch_admittances(&g, &AdmittanceOptions::default()).unwrap();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(ypr));
        let oracle = a.transpose() * d * a;
        let diff = (&y - &oracle).map(|c| c.norm()).max();
        assert!(diff < 1e-12, "max |Y - AᵀDA| = {diff}");

        // off-diagonal equals negative sum of the two parallel admittances
        let y0 = Branch::line(1, 2, 1000.0, 0.1, 0.2).series_impedance_ohm().inv();
        let y1 = Branch::line(1, 2, 500.0, 0.3, 0.1).series_impedance_ohm().inv();
        assert!((y[(0, 1)] + (y0 + y1)).norm() < 1e-12);
    }

    #[test]
    fn admittance_symmetry() {
        let g = path3();
        let y = admittance_matrix(&g).unwrap().entries;
        let asym = (&y - y.transpose()).map(|c| c.norm()).max();
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn zero_impedance_line_is_error_switch_gets_surrogate() {
        let line = Branch::line(1, 2, 0.0, 0.0, 0.0);
        let g = GridGraph::from_branches(vec![line]).unwrap();
        assert!(matches!(
            admittance_matrix(&g),
            Err(GridError::ZeroImpedance { .. })
        ));

        let mut sw = Branch::line(1, 2, 0.0, 0.0, 0.0);
        sw.kind = BranchKind::Switch;
        let g = GridGraph::from_branches(vec![sw]).unwrap();
        let y = admittance_matrix(&g).unwrap().entries;
        let expected = Complex64::new(1e-4, 1e-4).inv();
        assert!((y[(0, 0)] - expected).norm() < 1e-6);
    }

    #[test]
    fn laplacian_single_edge_and_triangle() {
        let g = GridGraph::from_branches(vec![Branch::line(1, 2, 100.0, 0.1, 0.1)]).unwrap();
        assert_eq!(laplacian(&g), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let tri = GridGraph::from_branches(vec![
            Branch::line(1, 2, 100.0, 0.1, 0.1),
            Branch::line(2, 3, 100.0, 0.1, 0.1),
            Branch::line(3, 1, 100.0, 0.1, 0.1),
        ])
        .unwrap();
        let l = laplacian(&tri);
        for i in 0..3 {
            assert_eq!(l[(i, i)], 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(l[(i, j)], -1.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_row_sums_zero_with_parallel_and_open() {
        let mut open = Branch::line(3, 1, 100.0, 0.1, 0.1);
        open.status = BranchStatus::Open;
        let g = GridGraph::new(
            vec![Bus::new(1), Bus::new(2), Bus::new(3)],
            vec![
                Branch::line(1, 2, 100.0, 0.1, 0.1),
                Branch::line(1, 2, 200.0, 0.1, 0.1),
                Branch::line(2, 3, 100.0, 0.1, 0.1),
                open,
            ],
        )
        .unwrap();
        let l = laplacian(&g);
        for i in 0..3 {
            assert_abs_diff_eq!(l.row(i).sum(), 0.0, epsilon = 1e-15);
        }
        // parallel collapsed: deg(1) = 1 despite two physical branches
        assert_eq!(l[(0, 0)], 1.0);
    }
}
