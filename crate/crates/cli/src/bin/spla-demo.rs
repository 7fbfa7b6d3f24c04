use clap::{Parser, Subcommand};
use spla_cli::demo::{batched_ode, euler, heat};
use spla_core::Executor;

#[derive(Parser)]
#[command(name = "spla-demo", about = "Demo applications for spla-core")]
struct Cli {
    #[command(subcommand)]
    demo: Demo,
}

#[derive(Subcommand)]
enum Demo {
    /// Backward Euler on du/dt = -u.
    Euler {
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
    },
    /// Poisson problem on the unit square through the facade.
    Heat {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value = "reference")]
        backend: String,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// One implicit step of many small kinetics systems.
    Batched {
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        #[arg(long, default_value = "reference")]
        backend: String,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(demo: Demo) -> Result<(), Box<dyn std::error::Error>> {
    match demo {
        Demo::Euler { steps, dt } => {
            let history = euler::decay(&Executor::reference(), 1.0, dt, steps)?;
            for (k, u) in history.iter().enumerate() {
                println!(
                    "step {:>3}  u = {u:.12}  exact = {:.12}",
                    k + 1,
                    (1.0 + dt).powi(-(k as i32 + 1))
                );
            }
        }
        Demo::Heat {
            n,
            backend,
            workers,
        } => {
            let r = heat::heat_demo(n, &backend, workers)?;
            println!(
                "n = {}  iterations = {}  converged = {}  max error = {:.3e}  relative residual = {:.3e}",
                r.n, r.iterations, r.converged, r.max_error, r.relative_residual
            );
        }
        Demo::Batched {
            cells,
            backend,
            workers,
            seed,
        } => {
            let r = batched_ode::batched_ode_demo(cells, &backend, workers, seed)?;
            let converged = r.converged.iter().filter(|&&c| c).count();
            println!(
                "cells = {cells}  converged = {converged}  max iterations = {}  loop deviation = {:.3e}  mass drift = {:.3e}",
                r.iterations.iter().max().unwrap_or(&0),
                r.max_loop_deviation,
                r.max_mass_drift
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse().demo) {
        eprintln!("spla-demo: {e}");
        std::process::exit(1);
    }
}
