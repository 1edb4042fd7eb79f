//! Jacobi-preconditioned conjugate gradients for symmetric positive
//! (semi-)definite systems, with an optional projector applied to every
//! iterate (deflation of a known kernel).

use super::sparse::{axpy, dot, CsrMatrix};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final value of the caller's residual measure.
    pub residual: f64,
    pub converged: bool,
}

pub struct CgSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 20_000 }
    }
}

/// Solves `A x = b`. `residual_measure(r)` maps the algebraic residual
/// `b - A x` to the relative quantity tested against `tol`; `project`
/// is applied to the search directions and iterate when given.
pub fn pcg<P, R>(
    a: &CsrMatrix,
    b: &[f64],
    settings: &CgSettings,
    project: Option<P>,
    residual_measure: R,
) -> CgOutcome
where
    P: Fn(&mut [f64]),
    R: Fn(&[f64]) -> f64,
{
    let n = b.len();
    let inv_diag: Vec<f64> = a
        .diagonal_entries()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut res = residual_measure(&r);
    if res <= settings.tol {
        return CgOutcome { x, iterations: 0, residual: res, converged: true };
    }
    let precond = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        if let Some(p) = project.as_ref() {
            p(&mut z);
        }
        z
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = (res, x.clone());
    let mut stall = 0usize;
    for it in 1..=settings.max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        // refresh the true residual periodically to avoid drift
        if it % 50 == 0 {
            if let Some(proj) = project.as_ref() {
                proj(&mut x);
            }
            let ax = a.mul_vec(&x);
            r = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        }
        res = residual_measure(&r);
        if res < best.0 {
            best = (res, x.clone());
            stall = 0;
        } else {
            stall += 1;
        }
        if res <= settings.tol {
            if let Some(proj) = project.as_ref() {
                proj(&mut x);
            }
            return CgOutcome { x, iterations: it, residual: res, converged: true };
        }
        if stall > 400 {
            break;
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    let (res, mut x) = best;
    if let Some(proj) = project.as_ref() {
        proj(&mut x);
    }
    CgOutcome { x, iterations: settings.max_iter, residual: res, converged: res <= settings.tol }
}
