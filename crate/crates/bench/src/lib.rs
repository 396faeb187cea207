//! Benchmarks for the majorant pipeline; see `benches/majorant.rs`.

use std::sync::Arc;

use majorant_core::{assemble_majorant, CaseConfig, FluxSpace, MajorantSystem, PrimalSolution};

/// Majorant system of the sine problem on an `n x n` mesh.
pub fn sample_system(n: usize, p1: usize, p2: usize) -> MajorantSystem {
    let primal = PrimalSolution::compute(&CaseConfig { n, p1, ..CaseConfig::default() }).expect("primal solve");
    let flux = Arc::new(FluxSpace::from_label(primal.space.mesh().clone(), p2).expect("flux space"));
    assemble_majorant(flux, &primal.space, &primal.v, &primal.problem, None).expect("assembly")
}
