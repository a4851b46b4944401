//! The Toeplitz embedding F_k: Fubini–Study pullback along the Reeb field,
//! the Hessian of h^F at the diagonal, and the separation scan.

use std::sync::Arc;
use toeplab::cutoff_moments::{moments, CutoffSpec};
use toeplab::embedding_geometry::{separation_scan, Embedding, EmbeddingConfig};
use toeplab::model_geometry::{ContactData, SpherePoint};
use toeplab::spectral_basis::DegreeKernelTable;

fn main() -> toeplab::Result<()> {
    let cutoff = CutoffSpec::default();
    let m = moments(&cutoff, 1)?;
    let table = Arc::new(DegreeKernelTable::build(1, 128)?);
    let x = SpherePoint::hopf(0.4, 0.2, 2.0);
    let reeb = ContactData::reeb_field(&x);
    println!("reference var(η) = {:.6}", m.var);
    for k in [32.0, 64.0, 128.0] {
        let emb = Embedding::new(
            table.clone(),
            EmbeddingConfig {
                k,
                cutoff,
                kappa: 0,
            },
        )?;
        let fs = emb.fs_pullback_real(&reeb, &reeb).re / (k * k);
        let eig = emb.hessian_eigenvalues(&x);
        println!("k = {k:>4}: k⁻² F*ds²(T,T) = {fs:.6}, Hessian eigenvalues {eig:.4?}");
    }
    let emb = Embedding::new(
        table,
        EmbeddingConfig {
            k: 64.0,
            cutoff,
            kappa: 0,
        },
    )?;
    let scan = separation_scan(&emb, 300, 0.5, 7)?;
    println!(
        "separation at k = 64, δ = 0.5: max h over {} pairs = {:.3e}",
        scan.pairs, scan.max_h
    );
    Ok(())
}
