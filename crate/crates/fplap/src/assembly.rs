use fplap_core::kernel::KernelAssembler;
use fplap_core::{KernelMatrix, KernelParams, ManifoldMesh};
use rayon::prelude::*;

/// Kernel assembly with rows computed in parallel; bitwise equal to the serial result.
pub fn assemble_parallel(mesh: &ManifoldMesh, params: KernelParams) -> fplap_core::Result<KernelMatrix> {
    let asm = KernelAssembler::new(mesh, params)?;
    let rows = (0..asm.len()).into_par_iter().map(|i| asm.row(i)).collect();
    asm.finish(rows)
}
