//! Classical fourth-order Runge-Kutta for i dβ/dt = H(t) β with a
//! tridiagonal H(t) whose off-diagonal is fixed and whose diagonal varies.

use num_complex::Complex64;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// A tridiagonal generator with a time-dependent diagonal.
pub struct DrivenTridiagonal<F>
where
    F: Fn(f64, &mut [f64]),
{
    off_diagonal: Vec<f64>,
    diagonal_at: F,
    scratch: Vec<f64>,
}

impl<F> DrivenTridiagonal<F>
where
    F: Fn(f64, &mut [f64]),
{
    /// `diagonal_at(t, out)` must fill `out` (length n) with H_jj(t).
    pub fn new(off_diagonal: Vec<f64>, diagonal_at: F) -> Self {
        let n = off_diagonal.len() + 1;
        Self { off_diagonal, diagonal_at, scratch: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.off_diagonal.len() + 1
    }

    /// out = −i H(t) x
    fn rhs(&mut self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        (self.diagonal_at)(t, &mut self.scratch);
        let n = x.len();
        let e = &self.off_diagonal;
        for i in 0..n {
            let mut acc = x[i] * self.scratch[i];
            if i > 0 {
                acc += x[i - 1] * e[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * e[i];
            }
            out[i] = MINUS_I * acc;
        }
    }

    /// Advances `state` from `t0` to `t1` in `steps` equal RK4 steps.
    pub fn propagate(&mut self, state: &mut [Complex64], t0: f64, t1: f64, steps: usize) {
        let n = state.len();
        assert_eq!(n, self.dim(), "state length");
        if steps == 0 || t1 == t0 {
            return;
        }
        let h = (t1 - t0) / steps as f64;
        let zero = Complex64::new(0.0, 0.0);
        let mut k1 = vec![zero; n];
        let mut k2 = vec![zero; n];
        let mut k3 = vec![zero; n];
        let mut k4 = vec![zero; n];
        let mut tmp = vec![zero; n];

        for s in 0..steps {
            let t = t0 + s as f64 * h;
            self.rhs(t, state, &mut k1);
            for i in 0..n {
                tmp[i] = state[i] + k1[i] * (0.5 * h);
            }
            self.rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = state[i] + k2[i] * (0.5 * h);
            }
            self.rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = state[i] + k3[i] * h;
            }
            self.rhs(t + h, &tmp, &mut k4);
            for i in 0..n {
                state[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
    }
}
