//! Krylov recurrences on single-column right-hand sides.
//!
//! Stopping decisions use the recurrence residual norms. CG and BiCGStab
//! report the recurrence norm at exit; GMRES reports the explicitly
//! recomputed residual it forms at the end of every cycle anyway.

use crate::container::Dim;
use crate::error::{Error, Result};
use crate::linop::{Dense, LinOp};

use super::criteria::evaluate;
use super::{Preconditioner, SolveReport, StopReason, StoppingCriterion};

pub(super) struct Context<'a> {
    pub matrix: &'a dyn LinOp,
    pub precond: &'a Preconditioner,
    pub criteria: &'a [StoppingCriterion],
    pub tol_breakdown: f64,
}

struct Tracker {
    initial: f64,
    history: Vec<f64>,
}

impl Tracker {
    fn new(initial: f64) -> Self {
        Tracker {
            initial,
            history: vec![initial],
        }
    }

    fn report(self, iterations: usize, final_norm: f64, reason: StopReason) -> SolveReport {
        SolveReport {
            iterations,
            initial_residual_norm: self.initial,
            final_residual_norm: final_norm,
            converged: reason == StopReason::ResidualNorm,
            stop_reason: reason,
            residual_history: self.history,
        }
    }

    fn breakdown(&self, iterations: usize, residual_norm: f64) -> Error {
        Error::Breakdown {
            iterations,
            residual_norm,
        }
    }
}

fn work(b: &Dense<'_>) -> Result<Dense<'static>> {
    Dense::new(b.executor(), Dim::new(b.size().rows, 1))
}

/// `r := b - A·x`
fn residual(ctx: &Context<'_>, b: &Dense<'_>, x: &Dense<'_>, r: &mut Dense<'_>) -> Result<()> {
    r.copy_from(b)?;
    ctx.matrix.advanced_apply(-1.0, x, 1.0, r)
}

fn tiny(value: f64, scale: f64) -> bool {
    !value.is_finite() || value.abs() <= scale
}

/// Preconditioned conjugate gradients (Hestenes–Stiefel).
pub(super) fn cg(ctx: &Context<'_>, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<SolveReport> {
    let mut r = work(b)?;
    residual(ctx, b, x, &mut r)?;
    let mut rk = r.norm1()?;
    let mut track = Tracker::new(rk);
    if let Some(reason) = evaluate(ctx.criteria, 0, track.initial, rk) {
        return Ok(track.report(0, rk, reason));
    }
    let threshold = ctx.tol_breakdown * b.dot1(b)?;

    let mut z = work(b)?;
    let mut q = work(b)?;
    ctx.precond.apply(&r, &mut z)?;
    let mut p = work(b)?;
    p.copy_from(&z)?;
    let mut rho = r.dot1(&z)?;
    let mut iter = 0;
    loop {
        ctx.matrix.apply(&p, &mut q)?;
        let pq = p.dot1(&q)?;
        if tiny(pq, threshold) {
            return Err(track.breakdown(iter, rk));
        }
        let alpha = rho / pq;
        x.add_scaled(alpha, &p)?;
        r.add_scaled(-alpha, &q)?;
        iter += 1;
        rk = r.norm1()?;
        track.history.push(rk);
        if let Some(reason) = evaluate(ctx.criteria, iter, track.initial, rk) {
            return Ok(track.report(iter, rk, reason));
        }
        if rk == 0.0 {
            return Ok(track.report(iter, rk, StopReason::ResidualNorm));
        }
        ctx.precond.apply(&r, &mut z)?;
        let rho_next = r.dot1(&z)?;
        if tiny(rho_next, threshold) {
            return Err(track.breakdown(iter, rk));
        }
        let beta = rho_next / rho;
        rho = rho_next;
        p.axpby(1.0, &z, beta)?;
    }
}

/// Preconditioned BiCGStab (van der Vorst).
pub(super) fn bicgstab(ctx: &Context<'_>, b: &Dense<'_>, x: &mut Dense<'_>) -> Result<SolveReport> {
    let mut r = work(b)?;
    residual(ctx, b, x, &mut r)?;
    let mut rk = r.norm1()?;
    let mut track = Tracker::new(rk);
    if let Some(reason) = evaluate(ctx.criteria, 0, track.initial, rk) {
        return Ok(track.report(0, rk, reason));
    }
    let threshold = ctx.tol_breakdown * b.dot1(b)?;

    let mut r_hat = work(b)?;
    r_hat.copy_from(&r)?;
    let mut p = work(b)?;
    let mut v = work(b)?;
    let mut y = work(b)?;
    let mut s = work(b)?;
    let mut z = work(b)?;
    let mut t = work(b)?;
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut iter = 0;
    loop {
        let rho_next = r_hat.dot1(&r)?;
        if tiny(rho_next, threshold) {
            return Err(track.breakdown(iter, rk));
        }
        if iter == 0 {
            p.copy_from(&r)?;
        } else {
            let beta = (rho_next / rho) * (alpha / omega);
            p.add_scaled(-omega, &v)?;
            p.axpby(1.0, &r, beta)?;
        }
        rho = rho_next;

        ctx.precond.apply(&p, &mut y)?;
        ctx.matrix.apply(&y, &mut v)?;
        let rv = r_hat.dot1(&v)?;
        if tiny(rv, threshold) {
            return Err(track.breakdown(iter, rk));
        }
        alpha = rho / rv;
        s.copy_from(&r)?;
        s.add_scaled(-alpha, &v)?;
        let sk = s.norm1()?;
        // half step already good enough
        if evaluate(ctx.criteria, iter + 1, track.initial, sk) == Some(StopReason::ResidualNorm) {
            x.add_scaled(alpha, &y)?;
            iter += 1;
            track.history.push(sk);
            return Ok(track.report(iter, sk, StopReason::ResidualNorm));
        }

        ctx.precond.apply(&s, &mut z)?;
        ctx.matrix.apply(&z, &mut t)?;
        let tt = t.dot1(&t)?;
        if tt == 0.0 || !tt.is_finite() {
            return Err(track.breakdown(iter, rk));
        }
        omega = t.dot1(&s)? / tt;
        x.add_scaled(alpha, &y)?;
        x.add_scaled(omega, &z)?;
        r.copy_from(&s)?;
        r.add_scaled(-omega, &t)?;
        iter += 1;
        rk = r.norm1()?;
        track.history.push(rk);
        if let Some(reason) = evaluate(ctx.criteria, iter, track.initial, rk) {
            return Ok(track.report(iter, rk, reason));
        }
        if rk == 0.0 {
            return Ok(track.report(iter, rk, StopReason::ResidualNorm));
        }
        if omega == 0.0 {
            return Err(track.breakdown(iter, rk));
        }
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if b.abs() > a.abs() {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    } else {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, c * t)
    }
}

/// Restarted, right-preconditioned GMRES with modified Gram–Schmidt
/// Arnoldi and Givens rotations.
pub(super) fn gmres(
    ctx: &Context<'_>,
    restart: usize,
    b: &Dense<'_>,
    x: &mut Dense<'_>,
) -> Result<SolveReport> {
    let m = restart;
    let mut r = work(b)?;
    residual(ctx, b, x, &mut r)?;
    let mut beta = r.norm1()?;
    let mut track = Tracker::new(beta);
    if let Some(reason) = evaluate(ctx.criteria, 0, track.initial, beta) {
        return Ok(track.report(0, beta, reason));
    }
    let happy = ctx.tol_breakdown * b.norm1()?;

    let mut basis = (0..=m).map(|_| work(b)).collect::<Result<Vec<_>>>()?;
    let mut z = work(b)?;
    let mut u = work(b)?;
    // column-major Hessenberg: h[j * (m + 1) + i] = H(i, j)
    let mut h = vec![0.0; (m + 1) * m];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut iter = 0;

    loop {
        basis[0].copy_from(&r)?;
        basis[0].scale(1.0 / beta)?;
        g.fill(0.0);
        g[0] = beta;
        let mut steps = 0;
        let mut stop = None;
        let mut exhausted = false;

        for j in 0..m {
            ctx.precond.apply(&basis[j], &mut z)?;
            let (head, tail) = basis.split_at_mut(j + 1);
            let w = &mut tail[0];
            ctx.matrix.apply(&z, w)?;
            let col = &mut h[j * (m + 1)..(j + 1) * (m + 1)];
            for (i, v) in head.iter().enumerate() {
                col[i] = w.dot1(v)?;
                w.add_scaled(-col[i], v)?;
            }
            let next = w.norm1()?;
            col[j + 1] = next;

            for i in 0..j {
                let tmp = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = tmp;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            cs[j] = c;
            sn[j] = s;
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;

            iter += 1;
            steps = j + 1;
            let estimate = g[j + 1].abs();
            track.history.push(estimate);
            stop = evaluate(ctx.criteria, iter, track.initial, estimate);
            if stop.is_some() {
                break;
            }
            if next <= happy {
                exhausted = true;
                break;
            }
            w.scale(1.0 / next)?;
        }

        // back substitution for the least-squares coefficients
        let mut y = g[..steps].to_vec();
        for i in (0..steps).rev() {
            for k in i + 1..steps {
                y[i] -= h[k * (m + 1) + i] * y[k];
            }
            y[i] /= h[i * (m + 1) + i];
        }
        u.fill(0.0)?;
        for (k, yk) in y.iter().enumerate() {
            u.add_scaled(*yk, &basis[k])?;
        }
        ctx.precond.apply(&u, &mut z)?;
        x.add_scaled(1.0, &z)?;

        residual(ctx, b, x, &mut r)?;
        beta = r.norm1()?;
        if let Some(reason) = stop {
            return Ok(track.report(iter, beta, reason));
        }
        if beta == 0.0 {
            return Ok(track.report(iter, beta, StopReason::ResidualNorm));
        }
        if exhausted {
            if let Some(reason) = evaluate(ctx.criteria, iter, track.initial, beta) {
                return Ok(track.report(iter, beta, reason));
            }
        }
        if !beta.is_finite() {
            return Err(track.breakdown(iter, beta));
        }
    }
}
