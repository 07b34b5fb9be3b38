use nalgebra::DMatrix;

use super::grid::{ScalarField, TorusGrid, MAX_DIM};
use super::spectral::Spectrum;
use crate::error::{check_range, Error, Result};
use crate::symfun::{newton_sequence, SymMatrix};

/// Position of a sorted index tuple in a flat component list.
#[derive(Debug, Clone)]
pub(crate) struct TupleIndex {
    pairs: [[usize; MAX_DIM]; MAX_DIM],
    triples: [[[usize; MAX_DIM]; MAX_DIM]; MAX_DIM],
    pair_list: Vec<[usize; 2]>,
    triple_list: Vec<[usize; 3]>,
}

impl TupleIndex {
    pub(crate) fn new(dim: usize) -> Self {
        let mut pairs = [[0; MAX_DIM]; MAX_DIM];
        let mut triples = [[[0; MAX_DIM]; MAX_DIM]; MAX_DIM];
        let mut pair_list = Vec::new();
        let mut triple_list = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                pairs[i][j] = pair_list.len();
                pairs[j][i] = pair_list.len();
                pair_list.push([i, j]);
            }
        }
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    let pos = triple_list.len();
                    for [a, b, c] in [[i, j, k], [i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                        triples[a][b][c] = pos;
                    }
                    triple_list.push([i, j, k]);
                }
            }
        }
        Self {
            pairs,
            triples,
            pair_list,
            triple_list,
        }
    }

    #[inline]
    pub(crate) fn pair(&self, i: usize, j: usize) -> usize {
        self.pairs[i][j]
    }

    #[inline]
    pub(crate) fn triple(&self, i: usize, j: usize, k: usize) -> usize {
        self.triples[i][j][k]
    }
}

/// Derivatives of one function on one grid: Hessian, optionally all third
/// derivatives and the Hessian of the Laplacian (`∂_t A = ΔA` along the heat flow).
#[derive(Debug, Clone)]
pub(crate) struct Jet {
    pub(crate) grid: TorusGrid,
    pub(crate) index: TupleIndex,
    pub(crate) hessian: Vec<Vec<f64>>,
    pub(crate) third: Vec<Vec<f64>>,
    pub(crate) lap_hessian: Vec<Vec<f64>>,
}

impl Jet {
    pub(crate) fn new(spectrum: &Spectrum, third: bool, lap_hessian: bool) -> Result<Self> {
        let grid = spectrum.grid().clone();
        let index = TupleIndex::new(grid.dim());
        let hessian = index
            .pair_list
            .iter()
            .map(|p| Ok(spectrum.derivative_spectrum(p, 2)?.to_field().into_samples()))
            .collect::<Result<Vec<_>>>()?;
        let third = if third {
            index
                .triple_list
                .iter()
                .map(|t| Ok(spectrum.derivative_spectrum(t, 3)?.to_field().into_samples()))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let lap_hessian = if lap_hessian {
            let lap = spectrum.laplacian_spectrum();
            index
                .pair_list
                .iter()
                .map(|p| Ok(lap.derivative_spectrum(p, 2)?.to_field().into_samples()))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            grid,
            index,
            hessian,
            third,
            lap_hessian,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub(crate) fn hessian_at(&self, p: usize) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.hessian[self.index.pair(i, j)][p])
    }

    pub(crate) fn lap_hessian_at(&self, p: usize) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.lap_hessian[self.index.pair(i, j)][p])
    }

    /// `∇_i A` at node `p`: entries `u_{abi}`.
    pub(crate) fn grad_hessian_at(&self, p: usize, i: usize) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.third[self.index.triple(a, b, i)][p])
    }
}

/// Hessian `u_ij` of a field, stored as the `n(n+1)/2` upper-triangle components.
#[derive(Debug, Clone)]
pub struct HessianField {
    jet: Jet,
}

impl HessianField {
    pub fn grid(&self) -> &TorusGrid {
        &self.jet.grid
    }

    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        ScalarField::from_raw(
            self.jet.grid.clone(),
            self.jet.hessian[self.jet.index.pair(i, j)].clone(),
        )
    }

    pub fn at(&self, p: usize) -> SymMatrix {
        use crate::symfun::SelfAdjoint;
        SymMatrix::from_dense_projected(self.jet.hessian_at(p))
    }

    /// Pointwise trace, which equals the Laplacian of the field.
    pub fn trace(&self) -> ScalarField {
        let n = self.jet.dim();
        let values = (0..self.jet.grid.len())
            .map(|p| (0..n).map(|i| self.jet.hessian[self.jet.index.pair(i, i)][p]).sum())
            .collect();
        ScalarField::from_raw(self.jet.grid.clone(), values)
    }
}

fn check_sym_dim(f: &ScalarField) -> Result<()> {
    let d = f.grid().dim();
    if d < SymMatrix::MIN_DIM {
        return Err(Error::InvalidArgument(format!(
            "Hessian algebra needs dimension >= 2, got {d}"
        )));
    }
    Ok(())
}

pub fn hessian_field(f: &ScalarField) -> Result<HessianField> {
    check_sym_dim(f)?;
    Ok(HessianField {
        jet: Jet::new(&f.spectrum(), false, false)?,
    })
}

/// Pointwise `σ_k` of the Hessian at every node.
pub fn sigma_field(f: &ScalarField, k: usize) -> Result<ScalarField> {
    check_sym_dim(f)?;
    if k == 0 {
        return Err(Error::InvalidArgument("sigma field needs k >= 1".into()));
    }
    check_range(k, f.grid().dim())?;
    let jet = Jet::new(&f.spectrum(), false, false)?;
    let values = (0..jet.grid.len())
        .map(|p| newton_sequence(&jet.hessian_at(p), k).0[k])
        .collect();
    Ok(ScalarField::from_raw(jet.grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::elementary_symmetric;
    use crate::toruslab::spectral::laplacian;

    #[test]
    fn separable_sigma_fields() {
        let g = TorusGrid::periodic_box(2, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| -x[0].cos() - x[1].cos()).unwrap();
        let s1 = sigma_field(&f, 1).unwrap();
        let s2 = sigma_field(&f, 2).unwrap();
        let e1 = ScalarField::from_fn(&g, |x| x[0].cos() + x[1].cos()).unwrap();
        let e2 = ScalarField::from_fn(&g, |x| x[0].cos() * x[1].cos()).unwrap();
        assert!(s1.sup_distance(&e1) < 1e-12);
        assert!(s2.sup_distance(&e2) < 1e-12);
        assert!(sigma_field(&f, 3).is_err());
    }

    #[test]
    fn hessian_trace_is_laplacian() {
        let g = TorusGrid::periodic_box(3, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() * (3.0 * x[2]).cos()).unwrap();
        let h = hessian_field(&f).unwrap();
        assert!(h.trace().sup_distance(&laplacian(&f)) < 1e-10);
        assert_eq!(h.component(0, 2), h.component(2, 0));
        let a = h.at(100);
        let s3 = elementary_symmetric(&a, 3).unwrap();
        assert!((s3 - sigma_field(&f, 3).unwrap().samples()[100]).abs() < 1e-12);
    }

    #[test]
    fn tuple_index_is_symmetric() {
        let t = TupleIndex::new(3);
        assert_eq!(t.pair(0, 2), t.pair(2, 0));
        assert_eq!(t.triple(0, 1, 2), t.triple(2, 0, 1));
        assert_eq!(t.triple_list.len(), 10);
        assert_eq!(t.pair_list.len(), 6);
    }
}
