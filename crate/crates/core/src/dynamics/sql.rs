use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, identity, operator_norm, ComplexMatrix, HermitianOperator, C64};

/// Gauge coefficients of the Kraus-family purification used for the SQL bound.
///
/// `h` is an `(r+1) × (r+1)` Hermitian matrix expanded as
/// `h⁽⁰⁾ + h⁽¹⁾√dt + h⁽²⁾dt`. Only `h⁽⁰⁾_{jk}` (`j, k ≥ 1`), `h⁽¹⁾_{0k}` and
/// `h⁽²⁾_{00}` are nonzero; every other entry is set to zero, which removes the
/// lower and higher orders of `β`.
#[derive(Clone, Debug)]
pub struct HCoefficients {
    /// `r × r` Hermitian block `h⁽⁰⁾_{jk}`, indices starting at the first jump.
    pub h0: ComplexMatrix,
    /// `h⁽¹⁾_{0k}`, `k = 1..r`; `h⁽¹⁾_{k0}` is its conjugate.
    pub h1: Vec<C64>,
    pub h2_00: f64,
}

#[derive(Clone, Debug)]
pub struct SqlBoundReport {
    pub h: HCoefficients,
    /// `α⁽²⁾ = Σ_k v_k† v_k`, `v_k = h⁽¹⁾_{k0} I + Σ_j h⁽⁰⁾_{kj} L_j`.
    pub alpha2: HermitianOperator,
    /// `4 ‖α⁽²⁾‖`.
    pub bound_coeff: f64,
    /// `‖β⁽²⁾‖` at the least-squares solution.
    pub residual_beta2: f64,
    pub solvable: bool,
    pub condition_number: f64,
    pub tol: f64,
}

impl SqlBoundReport {
    /// `4 ‖α⁽²⁾‖ t` on a time grid.
    pub fn bound_curve(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|t| self.bound_coeff * t).collect()
    }
}

/// Real-parameter basis of the `β⁽²⁾` equation: each unknown multiplies one
/// Hermitian matrix.
struct Design {
    columns: Vec<ComplexMatrix>,
    r: usize,
}

impl Design {
    /// Parameter order: `h⁽²⁾_00`; `Re, Im h⁽¹⁾_{0k}` per k; `h⁽⁰⁾_{jj}` per j;
    /// `Re, Im h⁽⁰⁾_{jk}` per `j < k`.
    fn new(model: &LindbladModel) -> Self {
        let d = model.dim();
        let ls = model.lindblad();
        let r = ls.len();
        let i = c64(0.0, 1.0);
        let mut columns = vec![identity(d)];
        for l in ls {
            let ld = l.adjoint();
            columns.push(l + &ld);
            columns.push((l - &ld) * i);
        }
        for l in ls {
            columns.push(l.adjoint() * l);
        }
        for j in 0..r {
            for k in (j + 1)..r {
                let jk = ls[j].adjoint() * &ls[k];
                let kj = ls[k].adjoint() * &ls[j];
                columns.push(&jk + &kj);
                columns.push((&jk - &kj) * i);
            }
        }
        Self { columns, r }
    }

    fn unpack(&self, x: &DVector<f64>) -> HCoefficients {
        let r = self.r;
        let h2_00 = x[0];
        let h1 = (0..r).map(|k| c64(x[1 + 2 * k], x[2 + 2 * k])).collect();
        let mut h0 = ComplexMatrix::zeros(r, r);
        let mut p = 1 + 2 * r;
        for j in 0..r {
            h0[(j, j)] = c64(x[p], 0.0);
            p += 1;
        }
        for j in 0..r {
            for k in (j + 1)..r {
                let z = c64(x[p], x[p + 1]);
                h0[(j, k)] = z;
                h0[(k, j)] = z.conj();
                p += 2;
            }
        }
        HCoefficients { h0, h1, h2_00 }
    }
}

/// `β⁽²⁾ = −[G + h⁽²⁾_00 I + Σ_k (h⁽¹⁾_{0k} L_k + h.c.) + Σ_{jk} h⁽⁰⁾_{jk} L_j† L_k]`.
pub fn beta2(model: &LindbladModel, h: &HCoefficients) -> ComplexMatrix {
    let d = model.dim();
    let ls = model.lindblad();
    let mut b = model.generator().matrix() + identity(d) * c64(h.h2_00, 0.0);
    for (k, l) in ls.iter().enumerate() {
        let t = l * h.h1[k];
        b += &t + t.adjoint();
    }
    for j in 0..ls.len() {
        for k in 0..ls.len() {
            b += ls[j].adjoint() * &ls[k] * h.h0[(j, k)];
        }
    }
    -b
}

/// `α⁽²⁾ = Σ_k v_k† v_k`.
pub fn alpha2(model: &LindbladModel, h: &HCoefficients) -> HermitianOperator {
    let d = model.dim();
    let ls = model.lindblad();
    let mut a = ComplexMatrix::zeros(d, d);
    for k in 0..ls.len() {
        let mut v = identity(d) * h.h1[k].conj();
        for (j, l) in ls.iter().enumerate() {
            v += l * h.h0[(k, j)];
        }
        a += v.adjoint() * &v;
    }
    HermitianOperator::symmetrized(a)
}

/// Solves `β⁽²⁾ = 0` by real least squares (minimum-norm solution) and builds
/// the linear QFI bound. `solvable` is false exactly when `G` has a component
/// outside the Lindblad span.
pub fn sql_bound(model: &LindbladModel, tol: f64) -> Result<SqlBoundReport> {
    let design = Design::new(model);
    let d = model.dim();
    let rows = 2 * d * d;
    let ncols = design.columns.len();
    let mut a = DMatrix::<f64>::zeros(rows, ncols);
    for (p, m) in design.columns.iter().enumerate() {
        for (idx, z) in m.iter().enumerate() {
            a[(2 * idx, p)] = z.re;
            a[(2 * idx + 1, p)] = z.im;
        }
    }
    let mut rhs = DVector::<f64>::zeros(rows);
    for (idx, z) in model.generator().matrix().iter().enumerate() {
        rhs[2 * idx] = -z.re;
        rhs[2 * idx + 1] = -z.im;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = 1e-12 * smax.max(1e-300);
    let kept: Vec<f64> = svd.singular_values.iter().copied().filter(|&s| s > cutoff).collect();
    let condition_number = match (kept.first(), kept.iter().copied().reduce(f64::min)) {
        (Some(_), Some(smin)) => smax / smin,
        _ => 1.0,
    };
    if condition_number > 1e14 {
        return Err(Error::IllConditioned { cond: condition_number });
    }
    let x = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::InvalidArgument(format!("least-squares solve failed: {e}")))?;
    let h = design.unpack(&x);
    let b2 = HermitianOperator::symmetrized(beta2(model, &h));
    let residual_beta2 = operator_norm(&b2)?;
    let scale = operator_norm(model.generator())?.max(1.0);
    let solvable = residual_beta2 < tol * scale;
    let alpha = alpha2(model, &h);
    let bound_coeff = 4.0 * operator_norm(&alpha)?;
    Ok(SqlBoundReport { h, alpha2: alpha, bound_coeff, residual_beta2, solvable, condition_number, tol })
}

/// `α_dt` and `β_dt` of the first-order Kraus family with the gauge
/// `h⁽⁰⁾ + h⁽¹⁾√dt + h⁽²⁾dt`, computed directly from the Kraus operators.
pub fn finite_dt_alpha_beta(model: &LindbladModel, h: &HCoefficients, dt: f64) -> (HermitianOperator, ComplexMatrix) {
    let d = model.dim();
    let r = model.rank();
    let kraus = super::evolve::first_order_kraus(&model.without_perturbation(), dt);
    let mut hm = ComplexMatrix::zeros(r + 1, r + 1);
    let sq = dt.sqrt();
    for j in 0..r {
        for k in 0..r {
            hm[(j + 1, k + 1)] = h.h0[(j, k)];
        }
        hm[(0, j + 1)] = h.h1[j] * sq;
        hm[(j + 1, 0)] = h.h1[j].conj() * sq;
    }
    hm[(0, 0)] = c64(h.h2_00 * dt, 0.0);
    let mut kdot: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(d, d); r + 1];
    kdot[0] = model.generator().matrix() * c64(0.0, -dt);
    let minus_i = c64(0.0, -1.0);
    let tilde: Vec<ComplexMatrix> = (0..=r)
        .map(|i| {
            let mut m = kdot[i].clone();
            for (j, k) in kraus.iter().enumerate() {
                m += k * (hm[(i, j)] * minus_i);
            }
            m
        })
        .collect();
    let mut alpha = ComplexMatrix::zeros(d, d);
    let mut beta = ComplexMatrix::zeros(d, d);
    for (t, k) in tilde.iter().zip(&kraus) {
        alpha += t.adjoint() * t;
        beta += t.adjoint() * k * c64(0.0, 1.0);
    }
    (HermitianOperator::symmetrized(alpha), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::paulis;
    use approx::assert_abs_diff_eq;

    fn half_z() -> HermitianOperator {
        HermitianOperator::new(paulis()[2].clone() * c64(0.5, 0.0)).unwrap()
    }

    #[test]
    fn dephasing_bound() {
        let kappa: f64 = 0.8;
        let m = LindbladModel::new(half_z(), vec![paulis()[2].clone() * c64(kappa.sqrt(), 0.0)], vec![], 1.0).unwrap();
        let rep = sql_bound(&m, 1e-9).unwrap();
        assert!(rep.solvable);
        assert!(rep.residual_beta2 < 1e-12);
        assert_abs_diff_eq!(rep.bound_coeff, 1.0 / (4.0 * kappa), epsilon = 1e-12);
    }

    #[test]
    fn perpendicular_noise_not_solvable() {
        let m = LindbladModel::new(half_z(), vec![paulis()[0].clone()], vec![], 1.0).unwrap();
        let rep = sql_bound(&m, 1e-9).unwrap();
        assert!(!rep.solvable);
        assert_abs_diff_eq!(rep.residual_beta2, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn generator_equal_to_l_dagger_l() {
        let l = ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let g = HermitianOperator::new(l.adjoint() * &l).unwrap();
        let m = LindbladModel::new(g, vec![l], vec![], 1.0).unwrap();
        let rep = sql_bound(&m, 1e-9).unwrap();
        assert!(rep.solvable && rep.residual_beta2 < 1e-10);
    }

    #[test]
    fn finite_dt_orders() {
        // Non-Hermitian jump with G in the span: β_dt vanishes to O(dt²), α_dt/dt → α⁽²⁾.
        let [x, y, z] = paulis();
        let l = &z * c64(0.7, 0.0) + &x * c64(0.2, 0.1);
        let g = HermitianOperator::symmetrized(&l + l.adjoint() + l.adjoint() * &l * c64(0.3, 0.0));
        let m = LindbladModel::new(g, vec![l, y * c64(0.5, 0.0)], vec![], 1.0).unwrap();
        let rep = sql_bound(&m, 1e-9).unwrap();
        assert!(rep.solvable);
        let mut prev: Option<f64> = None;
        for dt in [1e-2, 1e-3, 1e-4] {
            let (alpha, beta) = finite_dt_alpha_beta(&m, &rep.h, dt);
            let a_err = (alpha.matrix() / c64(dt, 0.0) - rep.alpha2.matrix()).norm();
            assert!(a_err < 50.0 * dt.sqrt(), "alpha/dt deviates by {a_err} at dt={dt}");
            let b = beta.norm();
            assert!(b < 50.0 * dt * dt, "beta {b} at dt={dt}");
            if let Some(p) = prev {
                assert!(b < p / 50.0);
            }
            prev = Some(b);
        }
    }
}
