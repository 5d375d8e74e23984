//! The symmetric, zero-diagonal Toeplitz risk matrix and its smallest
//! eigenpair.
//!
//! Two solvers sit behind [`min_eigenpair`]:
//!
//! * a dense solver that splits the centrosymmetric matrix into its
//!   symmetric and skew-symmetric halves and diagonalizes each half fully;
//! * a Toeplitz solver for large dimensions that brackets the smallest
//!   eigenvalue by bisection on positive definiteness (Durbin recursion,
//!   O(n²) per test) and recovers the eigenvector by shifted inverse
//!   iteration with Levinson solves.
//!
//! The Toeplitz solver hands over to the dense one whenever it cannot
//! certify a simple smallest eigenvalue.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{arg, Error, Result};
use crate::loss::FourierLoss;

/// Largest dimension that goes straight to the dense solver under
/// [`EigenSolver::Auto`].
pub const DENSE_LIMIT: usize = 1024;

/// Eigenvalues closer than this (times `max(1, ‖band‖)`) count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Symmetric Toeplitz matrix with zero diagonal and entry (i, j) = L_{|i−j|},
/// stored as its first column below the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskMatrix {
    band: Vec<f64>,
}

impl RiskMatrix {
    pub fn from_band(band: Vec<f64>) -> Self {
        Self { band }
    }

    pub fn dim(&self) -> usize {
        self.band.len() + 1
    }

    /// L_1..L_{dim-1}.
    pub fn band(&self) -> &[f64] {
        &self.band
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j);
        if d == 0 {
            0.0
        } else {
            self.band[d - 1]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn band_norm(&self) -> f64 {
        self.band.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for (k, &lk) in self.band.iter().enumerate() {
            if lk == 0.0 {
                continue;
            }
            let k = k + 1;
            for i in 0..n - k {
                out[i] += lk * v[i + k];
                out[i + k] += lk * v[i];
            }
        }
        out
    }

    /// vᵀ R v
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Self {
        Self::from_band(self.band.iter().map(|x| -x).collect())
    }

    fn check_finite(&self) -> Result<()> {
        if self.band.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("risk matrix has non-finite entries".into()));
        }
        Ok(())
    }

    fn tie_tolerance(&self) -> f64 {
        TIE_TOLERANCE * self.band_norm().max(1.0)
    }
}

/// Risk matrix of an m-qubit register: band_k = L_k for k = 1..2^m − 1.
pub fn build_risk_matrix(fl: &FourierLoss, m: u32) -> Result<RiskMatrix> {
    if !(1..=16).contains(&m) {
        return arg(format!("register size m must be in 1..=16, got {m}"));
    }
    let n = (1usize << m) - 1;
    fl.require_kmax(n)?;
    Ok(RiskMatrix::from_band(fl.coeffs()[..n].to_vec()))
}

/// Smallest eigenvalue with a unit eigenvector whose entries sum to a
/// non-negative value (first non-zero entry positive when the sum vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense up to [`DENSE_LIMIT`], Toeplitz bisection above.
    #[default]
    Auto,
    Dense,
    Toeplitz,
}

pub fn min_eigenpair(rm: &RiskMatrix) -> Result<Eigenpair> {
    min_eigenpair_with(rm, EigenSolver::Auto)
}

pub fn min_eigenpair_with(rm: &RiskMatrix, solver: EigenSolver) -> Result<Eigenpair> {
    rm.check_finite()?;
    let n = rm.dim();
    if n == 1 {
        return Ok(Eigenpair {
            value: 0.0,
            vector: vec![1.0],
        });
    }
    if rm.band.iter().all(|&x| x == 0.0) {
        // every vector is an eigenvector; the tie rule picks the uniform one
        let u = 1.0 / (n as f64).sqrt();
        return Ok(Eigenpair {
            value: 0.0,
            vector: vec![u; n],
        });
    }
    let pair = match solver {
        EigenSolver::Dense => dense_min_eigenpair(rm),
        EigenSolver::Toeplitz => {
            toeplitz_min_eigenpair(rm)?.map_or_else(|| dense_min_eigenpair(rm), Ok)
        }
        EigenSolver::Auto if n <= DENSE_LIMIT => dense_min_eigenpair(rm),
        EigenSolver::Auto => {
            toeplitz_min_eigenpair(rm)?.map_or_else(|| dense_min_eigenpair(rm), Ok)
        }
    }?;
    let resid = residual(rm, &pair);
    if resid > 1e-8 * rm.band_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numeric(format!(
            "eigenpair residual {resid:e} exceeds tolerance"
        )));
    }
    Ok(pair)
}

/// ‖R v − λ v‖₂
pub fn residual(rm: &RiskMatrix, pair: &Eigenpair) -> f64 {
    rm.mul_vec(&pair.vector)
        .iter()
        .zip(&pair.vector)
        .map(|(rv, v)| (rv - pair.value * v).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

// w ← w − (w·v) v for unit v
fn deflate(w: &mut [f64], v: &[f64]) {
    let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
    w.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
}

fn fix_sign(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let zero_sum = sum.abs() <= 1e-10 * (v.len() as f64).sqrt();
    let flip = if zero_sum {
        v.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0)
    } else {
        sum < 0.0
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

// Symmetric (J v = v) and skew (J v = −v) blocks of a centrosymmetric
// Toeplitz matrix in the basis (e_i ± e_{n−1−i})/√2, plus e_mid for odd n.
fn half_blocks(rm: &RiskMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = rm.dim();
    let p = n / 2;
    let odd = n % 2 == 1;
    let t = |d: usize| if d == 0 { 0.0 } else { rm.band[d - 1] };
    let sym_dim = p + usize::from(odd);
    let mut sym = DMatrix::zeros(sym_dim, sym_dim);
    let mut skew = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let direct = t(i.abs_diff(j));
            let mirrored = t(n - 1 - i - j);
            sym[(i, j)] = direct + mirrored;
            skew[(i, j)] = direct - mirrored;
        }
    }
    if odd {
        for i in 0..p {
            let v = std::f64::consts::SQRT_2 * t(p - i);
            sym[(i, p)] = v;
            sym[(p, i)] = v;
        }
    }
    (sym, skew)
}

fn dense_min_eigenpair(rm: &RiskMatrix) -> Result<Eigenpair> {
    let n = rm.dim();
    let p = n / 2;
    let (sym, skew) = half_blocks(rm);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    let sym_eig = SymmetricEigen::new(sym);
    for (idx, &val) in sym_eig.eigenvalues.iter().enumerate() {
        let col = sym_eig.eigenvectors.column(idx);
        let mut full = vec![0.0; n];
        for i in 0..p {
            full[i] = s * col[i];
            full[n - 1 - i] = s * col[i];
        }
        if n % 2 == 1 {
            full[p] = col[p];
        }
        candidates.push((val, full));
    }
    if p > 0 {
        let skew_eig = SymmetricEigen::new(skew);
        for (idx, &val) in skew_eig.eigenvalues.iter().enumerate() {
            let col = skew_eig.eigenvectors.column(idx);
            let mut full = vec![0.0; n];
            for i in 0..p {
                full[i] = s * col[i];
                full[n - 1 - i] = -s * col[i];
            }
            candidates.push((val, full));
        }
    }
    if candidates.iter().any(|(v, _)| !v.is_finite()) {
        return Err(Error::Numeric(
            "dense eigensolver produced non-finite values".into(),
        ));
    }
    let lambda = candidates
        .iter()
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    let tol = rm.tie_tolerance();
    let tied: Vec<&Vec<f64>> = candidates
        .iter()
        .filter(|(v, _)| *v <= lambda + tol)
        .map(|(_, vec)| vec)
        .collect();

    let mut vector = if tied.len() == 1 {
        tied[0].clone()
    } else {
        // project the uniform vector onto the tied eigenspace
        let u = 1.0 / (n as f64).sqrt();
        let mut proj = vec![0.0; n];
        for v in &tied {
            let c: f64 = v.iter().sum::<f64>() * u;
            proj.iter_mut().zip(v.iter()).for_each(|(p, x)| *p += c * x);
        }
        let norm = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            proj
        } else {
            let mut best = tied[0].clone();
            fix_sign(&mut best);
            let mut best_sum: f64 = best.iter().sum();
            for v in &tied[1..] {
                let mut v = (*v).clone();
                fix_sign(&mut v);
                let sum: f64 = v.iter().sum();
                if sum > best_sum + 1e-12 {
                    best = v;
                    best_sum = sum;
                }
            }
            best
        }
    };
    normalize(&mut vector);
    fix_sign(&mut vector);
    let value = if tied.len() == 1 {
        lambda
    } else {
        rm.quadratic_form(&vector)
    };
    Ok(Eigenpair { value, vector })
}

/// Durbin recursion on the unit-diagonal Toeplitz matrix with off-diagonal
/// r_1..r_{n−1}. Returns the number of negative ratios det T_{k+1}/det T_k,
/// which equals the number of negative eigenvalues when no leading minor
/// vanishes. `None` signals a near-singular leading minor. With
/// `stop_at_negative` the count is only 0 or 1.
fn durbin_inertia(r: &[f64], y: &mut [f64], stop_at_negative: bool) -> Option<usize> {
    let n = r.len() + 1;
    if n == 1 {
        return Some(0);
    }
    let mut negatives = 0;
    y[0] = -r[0];
    let mut alpha = -r[0];
    let mut beta = 1.0_f64;
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if beta.abs() < 1e-300 || !beta.is_finite() {
            return None;
        }
        if beta < 0.0 {
            negatives += 1;
            if stop_at_negative {
                return Some(negatives);
            }
        }
        if k == n - 1 {
            break;
        }
        let dot: f64 = y[..k]
            .iter()
            .zip(r[..k].iter().rev())
            .map(|(a, b)| a * b)
            .sum();
        alpha = -(r[k] + dot) / beta;
        update_reflect(&mut y[..k], alpha);
        y[k] = alpha;
    }
    Some(negatives)
}

// y_i ← y_i + α y_{k−1−i}, in place
fn update_reflect(y: &mut [f64], alpha: f64) {
    let k = y.len();
    for i in 0..k / 2 {
        let j = k - 1 - i;
        let (a, b) = (y[i], y[j]);
        y[i] = a + alpha * b;
        y[j] = b + alpha * a;
    }
    if k % 2 == 1 {
        let mid = k / 2;
        y[mid] += alpha * y[mid];
    }
}

/// Levinson solve of T x = b for the unit-diagonal symmetric Toeplitz T with
/// off-diagonal r_1..r_{n−1}.
fn levinson_solve(r: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[0] = b[0];
    if n == 1 {
        return x;
    }
    y[0] = -r[0];
    let mut alpha = -r[0];
    let mut beta = 1.0;
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        let dot_x: f64 = x[..k]
            .iter()
            .zip(r[..k].iter().rev())
            .map(|(a, b)| a * b)
            .sum();
        let mu = (b[k] - dot_x) / beta;
        for i in 0..k {
            x[i] += mu * y[k - 1 - i];
        }
        x[k] = mu;
        if k < n - 1 {
            let dot_y: f64 = y[..k]
                .iter()
                .zip(r[..k].iter().rev())
                .map(|(a, b)| a * b)
                .sum();
            alpha = -(r[k] + dot_y) / beta;
            update_reflect(&mut y[..k], alpha);
            y[k] = alpha;
        }
    }
    x
}

/// `Ok(None)` hands the problem to the dense solver.
fn toeplitz_min_eigenpair(rm: &RiskMatrix) -> Result<Option<Eigenpair>> {
    let n = rm.dim();
    let scale = rm.band.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let band: Vec<f64> = rm.band.iter().map(|x| x / scale).collect();
    let mut work = vec![0.0; n];
    let mut r = vec![0.0; n - 1];

    // T − σI with σ < 0, scaled to unit diagonal: r_k = t_k / (−σ)
    let scaled_offdiag = |sigma: f64, r: &mut Vec<f64>| {
        for (rk, tk) in r.iter_mut().zip(&band) {
            *rk = tk / -sigma;
        }
    };
    let definite = |sigma: f64, r: &mut Vec<f64>, work: &mut Vec<f64>| {
        scaled_offdiag(sigma, r);
        durbin_inertia(r, work, true) == Some(0)
    };

    // Gershgorin bracket; the trace is zero so λ_min < 0 for a non-zero band.
    let gersh: f64 = 2.0 * band.iter().map(|x| x.abs()).sum::<f64>();
    let mut lo = -gersh - 1.0;
    let mut hi = 0.0_f64;
    while hi - lo > 4.0 * f64::EPSILON * lo.abs() {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if definite(mid, &mut r, &mut work) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = lo;
    if lambda >= 0.0 {
        return Ok(None);
    }

    // Shifted inverse iteration; each solve gets one refinement step.
    let shift = lambda - 1e-10 * lambda.abs();
    scaled_offdiag(shift, &mut r);
    let unit = RiskMatrix::from_band(r.clone());
    let solve = |b: &[f64]| -> Option<Vec<f64>> {
        let mut x = levinson_solve(&r, b);
        let ax = unit.mul_vec(&x);
        let resid: Vec<f64> = b
            .iter()
            .zip(&ax)
            .zip(&x)
            .map(|((bi, ai), xi)| bi - ai - xi)
            .collect();
        let dx = levinson_solve(&r, &resid);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        x.iter().all(|v| v.is_finite()).then_some(x)
    };
    let scaled = RiskMatrix::from_band(band.clone());
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    normalize(&mut v);
    let mut res_v = f64::INFINITY;
    for _ in 0..50 {
        let Some(mut next) = solve(&v) else {
            return Ok(None);
        };
        normalize(&mut next);
        v = next;
        let rq = scaled.quadratic_form(&v);
        res_v = residual(
            &scaled,
            &Eigenpair {
                value: rq,
                vector: v.clone(),
            },
        );
        if res_v <= 1e-12 * (band.len() as f64).sqrt() {
            break;
        }
    }

    // A second eigenvalue within the tie tolerance needs the dense tie rule.
    // Any w ⊥ v has Rayleigh quotient ≥ λ_2, so a quotient clearly above
    // λ_min + tol rules a tie out; inverse iteration drives w toward λ_2.
    let lambda_v = scaled.quadratic_form(&v);
    let mut w: Vec<f64> = (0..n)
        .map(|i| {
            if i % 3 == 0 {
                1.0
            } else {
                -0.5 + i as f64 / n as f64
            }
        })
        .collect();
    for _ in 0..6 {
        deflate(&mut w, &v);
        normalize(&mut w);
        let Some(next) = solve(&w) else {
            return Ok(None);
        };
        w = next;
    }
    deflate(&mut w, &v);
    normalize(&mut w);
    if scaled.quadratic_form(&w) - lambda_v <= rm.tie_tolerance() / scale + 10.0 * res_v {
        return Ok(None);
    }

    fix_sign(&mut v);
    let value = rm.quadratic_form(&v);
    let pair = Eigenpair { value, vector: v };
    if residual(rm, &pair) > 1e-9 * rm.band_norm() {
        return Ok(None);
    }
    Ok(Some(pair))
}
