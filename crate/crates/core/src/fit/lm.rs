use nalgebra::{DMatrix, DVector};

const MAX_ITER: usize = 500;
const NULL_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub iterations: usize,
}

fn chi2<F: Fn(&[f64], f64) -> f64>(f: &F, p: &[f64], t: &[f64], y: &[f64], sigma: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .zip(sigma)
        .map(|((&ti, &yi), &si)| ((yi - f(p, ti)) / si).powi(2))
        .sum()
}

fn jacobian<F: Fn(&[f64], f64) -> f64>(f: &F, p: &[f64], t: &[f64], sigma: &[f64]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(t.len(), p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-7 * p[j].abs().max(1e-3);
        q[j] = p[j] + h;
        let up: Vec<f64> = t.iter().map(|&ti| f(&q, ti)).collect();
        q[j] = p[j] - h;
        let down: Vec<f64> = t.iter().map(|&ti| f(&q, ti)).collect();
        q[j] = p[j];
        for i in 0..t.len() {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h * sigma[i]);
        }
    }
    jac
}

/// (JᵀJ)⁻¹ through the pseudo-inverse. Parameters with a component along a
/// numerically null direction get infinite variance.
fn covariance(jtj: &DMatrix<f64>) -> DMatrix<f64> {
    let n = jtj.nrows();
    let svd = jtj.clone().svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return DMatrix::from_element(n, n, f64::NAN);
    };
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0) || !s_max.is_finite() {
        return DMatrix::from_element(n, n, f64::INFINITY);
    }
    let cutoff = s_max * NULL_TOLERANCE;
    let mut cov = DMatrix::zeros(n, n);
    let mut null_weight = vec![0.0; n];
    for k in 0..n {
        let s = svd.singular_values[k];
        if s > cutoff {
            cov += (v_t.row(k).transpose() * u.column(k).transpose()) / s;
        } else {
            for (i, w) in null_weight.iter_mut().enumerate() {
                *w += v_t[(k, i)].powi(2);
            }
        }
    }
    for (i, w) in null_weight.iter().enumerate() {
        if *w > 1e-6 {
            cov[(i, i)] = f64::INFINITY;
        }
    }
    cov
}

/// Weighted least squares by Levenberg–Marquardt with a central-difference
/// Jacobian. `project` maps a trial point back into the feasible set.
/// The covariance is (JᵀJ)⁻¹ at the optimum.
pub fn levenberg_marquardt<F, P>(f: &F, t: &[f64], y: &[f64], sigma: &[f64], p0: &[f64], project: P) -> LmResult
where
    F: Fn(&[f64], f64) -> f64,
    P: Fn(&mut [f64]),
{
    let mut p = p0.to_vec();
    project(&mut p);
    let mut current = chi2(f, &p, t, y, sigma);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let jac = jacobian(f, &p, t, sigma);
        let r = DVector::from_iterator(
            t.len(),
            t.iter()
                .zip(y)
                .zip(sigma)
                .map(|((&ti, &yi), &si)| (yi - f(&p, ti)) / si),
        );
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial);
            let c = chi2(f, &trial, t, y, sigma);
            if c.is_finite() && c < current {
                let gain = (current - c) / current.max(1e-300);
                p = trial;
                current = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = gain > 1e-12;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let jac = jacobian(f, &p, t, sigma);
    let covariance = covariance(&(jac.transpose() * &jac));
    LmResult {
        params: p,
        covariance,
        chi2: current,
        iterations,
    }
}
