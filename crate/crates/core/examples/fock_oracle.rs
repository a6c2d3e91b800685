// Closed-form covariance matrices of photon-subtracted and photon-added
// states checked against a truncated Fock-space construction.

use satqkd::states::{
    default_cutoff, fock_ket, oracle_cm_from_fock, source_cm, success_probability, Scheme,
    SourceParams,
};

pub fn run_example() -> satqkd::Result<()> {
    for scheme in [Scheme::Tmsv, Scheme::PhotonSubtracted, Scheme::PhotonAdded] {
        for (alpha2, t_s, n) in [(1.0, 0.5, 1), (5.0, 0.7, 2), (20.0, 0.9, 3)] {
            let src = SourceParams::new(scheme, alpha2, t_s, n)?;
            let ket = fock_ket(&src, default_cutoff(alpha2, src.photons))?;
            let fock = oracle_cm_from_fock(&ket)?;
            let closed = source_cm(&src);
            let err = (fock.x - closed.x)
                .abs()
                .max((fock.y - closed.y).abs())
                .max((fock.z - closed.z).abs());
            println!(
                "{:>5} α²={alpha2:>4} T_S={t_s} N={}  x={:.6} y={:.6} z={:.6}  P={:.4e}  |Δ|={err:.1e}  cutoff={}",
                scheme.label(),
                src.photons,
                closed.x,
                closed.y,
                closed.z,
                success_probability(&src),
                ket.cutoff()
            );
        }
    }
    Ok(())
}

fn main() -> satqkd::Result<()> {
    run_example()
}
