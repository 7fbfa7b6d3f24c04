//! Backward Euler for `du/dt = J u` with the solver used as an operator.

use spla_core::{
    Algorithm, Csr, Dense, Dim, Executor, LinOp, MatrixData, Result, SolverFactory,
    StoppingCriterion,
};

/// Holds `Ainv ~ (I - dt J)^-1` and work vectors.
///
/// One step computes `f = J u`, `x = Ainv f` and `u += dt x`, which equals
/// `u := (I - dt J)^-1 u`.
pub struct ImplicitEuler {
    dt: f64,
    jacobian: Csr,
    ainv: Box<dyn LinOp>,
    f: Dense<'static>,
    x: Dense<'static>,
}

impl ImplicitEuler {
    pub fn new(
        exec: &Executor,
        jacobian: &MatrixData,
        dt: f64,
        factory: &SolverFactory,
    ) -> Result<Self> {
        let n = jacobian.size().rows;
        let mut system = MatrixData::new(jacobian.size());
        for i in 0..n {
            system.add(i, i, 1.0)?;
        }
        for t in jacobian.nonzeros() {
            system.add(t.row, t.col, -dt * t.value)?;
        }
        let ainv = factory.generate(Csr::read(exec, &system)?)?;
        Ok(ImplicitEuler {
            dt,
            jacobian: Csr::read(exec, jacobian)?,
            ainv: Box::new(ainv),
            f: Dense::new(exec, Dim::new(n, 1))?,
            x: Dense::new(exec, Dim::new(n, 1))?,
        })
    }

    pub fn advance(&mut self, u: &mut Dense<'_>) -> Result<()> {
        self.jacobian.apply(u, &mut self.f)?;
        self.x.fill(0.0)?;
        self.ainv.apply(&self.f, &mut self.x)?;
        u.add_scaled(self.dt, &self.x)
    }
}

/// Integrates `du/dt = -u` from `u0` and returns `u` after every step.
pub fn decay(exec: &Executor, u0: f64, dt: f64, steps: usize) -> Result<Vec<f64>> {
    let jacobian = MatrixData::from_triplets(Dim::square(1), [(0, 0, -1.0)])?;
    let factory = SolverFactory::new(Algorithm::Cg).with_criteria([
        StoppingCriterion::Iteration(10),
        StoppingCriterion::ResidualNorm(1e-14),
    ]);
    let mut stepper = ImplicitEuler::new(exec, &jacobian, dt, &factory)?;
    let mut u = Dense::vector(exec, &[u0]);
    let mut history = Vec::with_capacity(steps);
    for _ in 0..steps {
        stepper.advance(&mut u)?;
        history.push(u.at(0, 0));
    }
    Ok(history)
}
