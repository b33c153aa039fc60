//! Box-constrained Nelder–Mead simplex search with restarts.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    /// Total iteration budget shared by all restarts.
    pub max_iter: usize,
    pub initial_step: f64,
    /// Simplex diameter below which a run counts as converged.
    pub x_tol: f64,
    pub f_abs_tol: f64,
    pub f_rel_tol: f64,
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iter: 2000, initial_step: 0.4, x_tol: 1e-7, f_abs_tol: 1e-16, f_rel_tol: 1e-10, restarts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

impl NelderMead {
    /// Minimizes `f` starting from `x0`, keeping every trial point inside
    /// `[lower, upper]`. Non-finite objective values count as `+inf`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert!(lower.len() == n && upper.len() == n, "bounds must match the dimension");
        let project = |x: &mut Vec<f64>| {
            for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                *xi = xi.clamp(*lo, *hi);
            }
        };
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut start = x0.to_vec();
        project(&mut start);
        let f_start = eval(&start);
        let mut best = Vertex { x: start, f: f_start };
        let mut iterations = 0;
        let mut converged = false;

        for _run in 0..=self.restarts {
            let mut simplex = vec![Vertex { x: best.x.clone(), f: best.f }];
            for i in 0..n {
                let mut x = best.x.clone();
                x[i] += if x[i] + self.initial_step <= upper[i] { self.initial_step } else { -self.initial_step };
                project(&mut x);
                let fx = eval(&x);
                simplex.push(Vertex { x, f: fx });
            }
            let before = best.f;
            converged = self.run(&mut simplex, &mut eval, &project, &mut iterations);
            best = simplex.swap_remove(0);
            if !converged {
                break;
            }
            let gain = before - best.f;
            if gain <= self.f_abs_tol + self.f_rel_tol * best.f.abs() {
                break;
            }
        }
        Minimum { x: best.x, fx: best.f, iterations, converged }
    }

    fn run<E, P>(&self, s: &mut [Vertex], eval: &mut E, project: &P, iterations: &mut usize) -> bool
    where
        E: FnMut(&[f64]) -> f64,
        P: Fn(&mut Vec<f64>),
    {
        let n = s.len() - 1;
        loop {
            s.sort_by(|a, b| a.f.total_cmp(&b.f));
            if self.has_converged(s) {
                return true;
            }
            if *iterations >= self.max_iter {
                return false;
            }
            *iterations += 1;

            let mut centroid = vec![0.0; n];
            for v in &s[..n] {
                for (c, x) in centroid.iter_mut().zip(&v.x) {
                    *c += x / n as f64;
                }
            }
            let along = |coef: f64, from: &[f64]| {
                let mut x: Vec<f64> = centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect();
                project(&mut x);
                x
            };
            let worst = s[n].x.clone();
            let xr = along(1.0, &worst);
            let fr = eval(&xr);

            if fr < s[0].f {
                let xe = along(2.0, &worst);
                let fe = eval(&xe);
                s[n] = if fe < fr { Vertex { x: xe, f: fe } } else { Vertex { x: xr, f: fr } };
                continue;
            }
            if fr < s[n - 1].f {
                s[n] = Vertex { x: xr, f: fr };
                continue;
            }
            let (xc, fc, accept) = if fr < s[n].f {
                let xc = along(0.5, &worst);
                let fc = eval(&xc);
                (xc, fc, fc <= fr)
            } else {
                let xc = along(-0.5, &worst);
                let fc = eval(&xc);
                (xc, fc, fc < s[n].f)
            };
            if accept {
                s[n] = Vertex { x: xc, f: fc };
                continue;
            }
            let anchor = s[0].x.clone();
            for v in &mut s[1..] {
                let mut x: Vec<f64> = anchor.iter().zip(&v.x).map(|(a, x)| a + 0.5 * (x - a)).collect();
                project(&mut x);
                v.f = eval(&x);
                v.x = x;
            }
        }
    }

    fn has_converged(&self, s: &[Vertex]) -> bool {
        let best = &s[0];
        let spread = s[s.len() - 1].f - best.f;
        let f_ok = spread <= self.f_abs_tol + self.f_rel_tol * best.f.abs();
        let diameter =
            s[1..].iter().flat_map(|v| v.x.iter().zip(&best.x).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        f_ok && diameter <= self.x_tol
    }
}
