/// A condition that ends an iterative solve.
///
/// A solver stops as soon as any of its criteria holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingCriterion {
    /// Stop once this many iterations have completed.
    Iteration(usize),
    /// Stop once `‖r_k‖ ≤ reduction_factor · ‖r_0‖`, where `r_0` is the
    /// residual of the initial guess.
    ResidualNorm(f64),
}

impl StoppingCriterion {
    pub fn check(&self, iteration: usize, initial_norm: f64, current_norm: f64) -> bool {
        match *self {
            StoppingCriterion::Iteration(max) => iteration >= max,
            StoppingCriterion::ResidualNorm(factor) => {
                initial_norm == 0.0 || current_norm <= factor * initial_norm
            }
        }
    }

    pub fn reason(&self) -> StopReason {
        match self {
            StoppingCriterion::Iteration(_) => StopReason::Iteration,
            StoppingCriterion::ResidualNorm(_) => StopReason::ResidualNorm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Iteration,
    ResidualNorm,
    /// A direct solve completed.
    Direct,
    /// The recurrence broke down (division by a vanishing quantity).
    Breakdown,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Iteration => "iteration",
            StopReason::ResidualNorm => "residual_norm",
            StopReason::Direct => "direct",
            StopReason::Breakdown => "breakdown",
        }
    }
}

/// Evaluates all criteria. When several hold at once the residual criterion
/// wins, so a solve that converges on its last allowed iteration counts as
/// converged.
pub(crate) fn evaluate(
    criteria: &[StoppingCriterion],
    iteration: usize,
    initial_norm: f64,
    current_norm: f64,
) -> Option<StopReason> {
    let mut fired = None;
    for c in criteria {
        if c.check(iteration, initial_norm, current_norm) {
            if c.reason() == StopReason::ResidualNorm {
                return Some(StopReason::ResidualNorm);
            }
            fired = Some(c.reason());
        }
    }
    fired
}
